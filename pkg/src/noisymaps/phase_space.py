"""Discrete phase space on the N x N torus.

Translation (chord) operators use the symmetrized convention

    T(q, p) = exp(i pi q p / N) U^q V^p,   U|n> = |n+1>,   V|n> = exp(2 pi i n / N)|n>

so that ``T(q, p)^dagger = T(-q, -p)``. The Wigner function lives on the
doubled 2N x 2N grid; point ``(a, b)`` sits at phase-space coordinate
``(a / 2N, b / 2N)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .hilbert import check_dimension

WIGNER_NORMALIZATION = "prefactor=1/(2N); full 2Nx2N grid sums to 1; sum over b of W(2n, b) = rho[n, n]"


class InvalidLineSpec(ValueError):
    """The line equation has no solutions on the grid, or no direction."""


def shift_operator(dim: int) -> np.ndarray:
    """Cyclic position shift ``U|n> = |n+1 mod N>``."""
    dim = check_dimension(dim)
    return np.roll(np.eye(dim, dtype=complex), 1, axis=0)


def clock_operator(dim: int) -> np.ndarray:
    """Momentum shift ``V|n> = exp(2 pi i n / N)|n>``."""
    dim = check_dimension(dim)
    return np.diag(np.exp(2j * np.pi * np.arange(dim) / dim))


def parity_operator(dim: int) -> np.ndarray:
    dim = check_dimension(dim)
    n = np.arange(dim)
    R = np.zeros((dim, dim), dtype=complex)
    R[(-n) % dim, n] = 1.0
    return R


def reduce_chord(alpha, dim: int) -> tuple[int, int]:
    q, p = alpha
    return int(q) % dim, int(p) % dim


def translation_operator(alpha, dim: int) -> np.ndarray:
    """Chord operator ``T(q, p)`` for ``alpha = (q, p)`` reduced mod N."""
    dim = check_dimension(dim)
    q, p = reduce_chord(alpha, dim)
    n = np.arange(dim)
    T = np.zeros((dim, dim), dtype=complex)
    # U^q V^p |n> = exp(2 pi i p n / N) |n + q>
    T[(n + q) % dim, n] = np.exp(1j * np.pi * q * p / dim) * np.exp(2j * np.pi * ((p * n) % dim) / dim)
    return T


def chord_commutation_phase(alpha, beta, dim: int) -> complex:
    """Phase ``w`` with ``T_alpha T_beta T_alpha^dagger = w T_beta``.

    Under the convention above this is ``exp(2 pi i (p_a q_b - q_a p_b) / N)``.
    """
    qa, pa = reduce_chord(alpha, dim)
    qb, pb = reduce_chord(beta, dim)
    return complex(np.exp(2j * np.pi * ((pa * qb - qa * pb) % dim) / dim))


@dataclass(frozen=True)
class LineSpec:
    """Line ``n2 q - n1 p = n3 (mod N)`` with direction ``(n1, n2)``."""

    n1: int
    n2: int
    n3: int

    @classmethod
    def parse(cls, text: str) -> "LineSpec":
        parts = [int(x) for x in text.split(",")]
        if len(parts) != 3:
            raise InvalidLineSpec(f"line spec needs three integers, got {text!r}")
        return cls(*parts)

    def __str__(self) -> str:
        return f"{self.n1},{self.n2},{self.n3}"


def line_points(spec: LineSpec, dim: int) -> list[tuple[int, int]]:
    """All grid points ``(q, p)`` on the line, sorted.

    The count is ``N * gcd(n1, n2, N)`` when the line is solvable, i.e. when
    ``gcd(n1, n2, N)`` divides ``n3``.
    """
    dim = check_dimension(dim)
    n1, n2, n3 = spec.n1 % dim, spec.n2 % dim, spec.n3 % dim
    if n1 == 0 and n2 == 0:
        raise InvalidLineSpec(f"line {spec} has no direction mod {dim}")
    g = gcd(gcd(n1, n2), dim)
    if n3 % g:
        raise InvalidLineSpec(f"line {spec} has no points mod {dim}")
    q, p = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    on_line = (n2 * q - n1 * p - n3) % dim == 0
    return [(int(a), int(b)) for a, b in zip(q[on_line], p[on_line])]


@dataclass(frozen=True)
class WignerGrid:
    values: np.ndarray
    normalization: str = WIGNER_NORMALIZATION

    @property
    def dim(self) -> int:
        return self.values.shape[0] // 2


def phase_point_operator(a: int, b: int, dim: int) -> np.ndarray:
    """``A(a, b) = U^a R V^-b exp(i pi a b / N)`` on the doubled grid."""
    U = np.linalg.matrix_power(shift_operator(dim), a % dim)
    Vinv = np.linalg.matrix_power(clock_operator(dim).conj(), b % dim)
    return U @ parity_operator(dim) @ Vinv * np.exp(1j * np.pi * a * b / dim)


def wigner_function(rho: np.ndarray, imag_atol: float = 1e-10) -> WignerGrid:
    """Discrete Wigner function ``W(a, b) = Tr[rho A(a, b)] / 2N``.

    Evaluated with one FFT per grid column: ``Tr[rho A(a, b)]`` is the DFT
    over m of ``rho[m, a - m]`` at frequency ``b``.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    m = np.arange(dim)
    a = np.arange(2 * dim)
    g = rho[m[None, :], (a[:, None] - m[None, :]) % dim]
    G = np.fft.fft(g, axis=1)
    b = np.arange(2 * dim)
    phase = np.exp(1j * np.pi * ((np.outer(a, b)) % (2 * dim)) / dim)
    W = phase * G[:, b % dim] / (2 * dim)
    if np.max(np.abs(W.imag)) > imag_atol:
        raise ValueError("Wigner function not real; is rho Hermitian?")
    return WignerGrid(np.ascontiguousarray(W.real))
