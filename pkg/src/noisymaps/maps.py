"""Quantized torus maps and the Grover iteration.

Map descriptors accepted by :func:`parse_map`::

    grover:w1[,w2,...] | baker | cat:alpha,beta | cat-hyp | cat-ell | cat-par | none
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import PhasePoint, check_dimension, dft_matrix, momentum_state

CAT_PRESETS = {
    "cat-hyp": (1, 1),
    "cat-ell": (-1, 1),
    "cat-par": (0, 1),
}


def cat_matrix(alpha: int, beta: int) -> np.ndarray:
    """Classical symplectic matrix ``[[2b, -1], [1 - 4ab, 2a]]`` (det = 1)."""
    alpha, beta = int(alpha), int(beta)
    return np.array([[2 * beta, -1], [1 - 4 * alpha * beta, 2 * alpha]], dtype=np.int64)


def classical_cat_step(alpha: int, beta: int, point) -> PhasePoint:
    q, p = PhasePoint(*point)
    M = cat_matrix(alpha, beta)
    q2 = M[0, 0] * q + M[0, 1] * p
    p2 = M[1, 0] * q + M[1, 1] * p
    return PhasePoint(q2 % 1.0, p2 % 1.0)


def cat_propagator(alpha: int, beta: int, dim: int) -> np.ndarray:
    """Quantum cat map ``<q'|U|q> = exp(-2 pi i (a q'^2 - q' q + b q^2) / N) / sqrt(N)``."""
    dim = check_dimension(dim)
    q = np.arange(dim)
    F = (alpha * q[:, None] ** 2 - np.outer(q, q) + beta * q[None, :] ** 2) % dim
    return np.exp(-2j * np.pi * F / dim) / np.sqrt(dim)


def baker_propagator(dim: int) -> np.ndarray:
    """Balazs-Voros quantum baker ``F_N^dagger diag(F_{N/2}, F_{N/2})``."""
    dim = check_dimension(dim)
    if dim % 2:
        raise ValueError(f"the quantum baker map needs even N, got {dim}")
    half = dim // 2
    blocks = np.zeros((dim, dim), dtype=complex)
    F_half = dft_matrix(half) if half > 1 else np.ones((1, 1), dtype=complex)
    blocks[:half, :half] = F_half
    blocks[half:, half:] = F_half
    return dft_matrix(dim).conj().T @ blocks


def _check_marked(marked, dim: int) -> tuple[int, ...]:
    marked = tuple(sorted({int(w) for w in marked}))
    if not marked or len(marked) >= dim:
        raise ValueError(f"need 1 <= |marked| < N, got {len(marked)} of N={dim}")
    if marked[0] < 0 or marked[-1] >= dim:
        raise ValueError(f"marked items must lie in [0, {dim})")
    return marked


def grover_operator(dim: int, marked) -> np.ndarray:
    """Grover step ``U_psi U_O`` with ``U_psi = I - 2|psi><psi|``.

    ``|psi>`` is the uniform superposition ``|p=0>`` and ``U_O`` flips the
    sign of the marked basis states. Note ``U_psi`` is minus the textbook
    inversion about the mean; the global sign drops out of every density
    matrix quantity.
    """
    dim = check_dimension(dim)
    marked = _check_marked(marked, dim)
    psi = momentum_state(0, dim)
    oracle = np.ones(dim)
    oracle[list(marked)] = -1.0
    reflect = np.eye(dim, dtype=complex) - 2 * np.outer(psi, psi.conj())
    return reflect * oracle[None, :]


@dataclass(frozen=True)
class GroverGeometry:
    theta: float
    t_opt: int
    lambda_pm: tuple[complex, complex]


def grover_geometry(dim: int, marked) -> GroverGeometry:
    """Rotation angle, optimal iteration count and invariant-plane eigenvalues.

    ``theta`` satisfies ``sin(theta) = 2 sqrt((N-M) M) / N``; it is computed
    as ``2 asin(sqrt(M/N))`` so that M > N/2 lands on the right branch.
    """
    dim = check_dimension(dim)
    M = len(_check_marked(marked, dim))
    theta = 2 * np.arcsin(np.sqrt(M / dim))
    t_opt = int(round(np.pi / 4 * np.sqrt(dim / M)))
    return GroverGeometry(float(theta), t_opt, (complex(np.exp(1j * theta)), complex(np.exp(-1j * theta))))


def grover_plane_projector(dim: int, marked) -> np.ndarray:
    """Projector on span{|alpha>, |beta>} (unmarked / marked uniform states)."""
    marked = _check_marked(marked, dim)
    beta = np.zeros(dim)
    beta[list(marked)] = 1.0
    alpha = 1.0 - beta
    beta /= np.linalg.norm(beta)
    alpha /= np.linalg.norm(alpha)
    return np.outer(alpha, alpha) + np.outer(beta, beta)


MAP_KINDS = ("grover", "baker", "cat", *CAT_PRESETS, "none")


def parse_map(descriptor: str, dim: int) -> np.ndarray:
    kind, _, arg = descriptor.strip().partition(":")
    if kind == "grover":
        if not arg:
            raise ValueError("grover needs marked items, e.g. grover:30")
        return grover_operator(dim, [int(w) for w in arg.split(",")])
    if kind == "baker":
        return baker_propagator(dim)
    if kind == "cat":
        parts = [int(x) for x in arg.split(",")] if arg else []
        if len(parts) != 2:
            raise ValueError(f"cat map needs alpha,beta, got {descriptor!r}")
        return cat_propagator(*parts, dim)
    if kind in CAT_PRESETS:
        return cat_propagator(*CAT_PRESETS[kind], dim)
    if kind == "none":
        return np.eye(check_dimension(dim), dtype=complex)
    raise ValueError(f"unknown map descriptor {descriptor!r}; expected one of {MAP_KINDS}")
