"""Finite-dimensional Hilbert space primitives on the discrete torus.

States are plain numpy arrays: a state vector is a length-``N`` complex
vector, a density matrix an ``N x N`` complex array. The computational basis
is identified with the position basis ``|q=n>``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

# PSD floor absorbing roundoff from long channel chains.
EIGENVALUE_FLOOR = -1e-10
STATE_ATOL = 1e-12

# Periodic images summed in the torus coherent state.
COHERENT_IMAGES = 3


class PhasePoint(NamedTuple):
    """Continuum phase-space point on the unit torus."""

    q: float
    p: float

    def reduced(self) -> "PhasePoint":
        return PhasePoint(float(self.q) % 1.0, float(self.p) % 1.0)


def check_dimension(dim: int, qubits: bool = False) -> int:
    """Validate a Hilbert space dimension and return it as an int.

    With ``qubits=True`` the dimension must also be a power of two.
    """
    n = int(dim)
    if n != dim or n < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {dim!r}")
    if qubits and n & (n - 1):
        raise ValueError(f"qubit features need N = 2**n, got N={n}")
    return n


def _fix_phase(psi: np.ndarray) -> np.ndarray:
    # largest-magnitude amplitude made real-positive (first one on ties)
    k = int(np.argmax(np.abs(psi)))
    return psi * (np.abs(psi[k]) / psi[k])


def _check_index(n: int, dim: int) -> int:
    if not 0 <= n < dim:
        raise IndexError(f"basis index {n} out of range for N={dim}")
    return int(n)


def position_state(n: int, dim: int) -> np.ndarray:
    dim = check_dimension(dim)
    psi = np.zeros(dim, dtype=complex)
    psi[_check_index(n, dim)] = 1.0
    return psi


def dft_matrix(dim: int) -> np.ndarray:
    """Unitary DFT with entries ``exp(-2 pi i q' q / N) / sqrt(N)``."""
    dim = check_dimension(dim)
    n = np.arange(dim)
    # reduce the exponent mod N before scaling so large N keeps full accuracy
    phase = np.outer(n, n) % dim
    return np.exp(-2j * np.pi * phase / dim) / np.sqrt(dim)


def momentum_state(k: int, dim: int) -> np.ndarray:
    """Momentum eigenstate ``|p=k>``, the k-th column of the inverse DFT."""
    dim = check_dimension(dim)
    k = _check_index(k, dim)
    psi = dft_matrix(dim).conj().T[:, k].copy()
    return _fix_phase(psi)


def coherent_state(center, dim: int) -> np.ndarray:
    """Periodized Gaussian coherent state centred at ``center = (q0, p0)``.

    The width parameter ``pi N`` gives equal spreads in position and
    momentum. Images ``|m| <= 3`` are summed, which leaves a tail below
    1e-12 for N >= 8.
    """
    dim = check_dimension(dim)
    q0, p0 = PhasePoint(*center).reduced()
    x = np.arange(dim)[:, None] / dim + np.arange(-COHERENT_IMAGES, COHERENT_IMAGES + 1)[None, :]
    amp = np.exp(-np.pi * dim * (x - q0) ** 2) * np.exp(2j * np.pi * dim * p0 * x)
    psi = amp.sum(axis=1)
    psi /= np.linalg.norm(psi)
    return _fix_phase(psi)


def cat_state(c1, c2, dim: int) -> np.ndarray:
    """Normalized superposition of two coherent states.

    Raises ``ValueError`` when both centres coincide; the doubled vector
    would just be the coherent state again.
    """
    a = coherent_state(c1, dim)
    b = coherent_state(c2, dim)
    if np.allclose(a, b, atol=STATE_ATOL):
        raise ValueError("cat state needs two distinct coherent states")
    psi = a + b
    return psi / np.linalg.norm(psi)


def density_matrix(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def maximally_mixed(dim: int) -> np.ndarray:
    dim = check_dimension(dim)
    return np.eye(dim, dtype=complex) / dim


def check_state_vector(psi: np.ndarray, atol: float = STATE_ATOL) -> None:
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > atol:
        raise ValueError(f"state vector norm {norm!r} differs from 1")


def check_density_matrix(rho: np.ndarray, atol: float = STATE_ATOL) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit trace and PSD."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > atol:
        raise ValueError(f"density matrix not Hermitian (deviation {herm:.3g})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > atol:
        raise ValueError(f"density matrix trace {tr!r} differs from 1")
    lo = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if lo < EIGENVALUE_FLOOR:
        raise ValueError(f"density matrix has negative eigenvalue {lo:.3g}")


def purity(rho: np.ndarray) -> float:
    # Tr(rho^2) for Hermitian rho is the squared Frobenius norm
    return float(np.vdot(rho, rho).real)


def linear_entropy(rho: np.ndarray) -> float:
    """Linear entropy ``-ln Tr(rho^2)``: 0 for pure states, ln N at I/N."""
    # roundoff can push the purity of a pure state a hair above 1
    return max(0.0, -float(np.log(purity(rho))))
