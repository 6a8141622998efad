"""Generalized noise channels in Kraus form.

Four families are provided for an N-level system: the depolarizing channel
(uniform chord twirl), phase damping with a coefficient matrix ``C_ij``,
phase damping along a phase-space line, and a Gaussian amplitude damping
channel whose transition matrix is symmetric and doubly stochastic.

Channel descriptors accepted by :func:`parse_channel`::

    dc | pdc | pdc-line:n1,n2,n3 | adc | pdc-rand:SEED | none
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import check_dimension
from .phase_space import LineSpec, line_points, translation_operator

TP_ATOL = 1e-10
CHOI_FLOOR = -1e-10
SINKHORN_TOL = 1e-12
SINKHORN_MAX_SWEEPS = 10_000


class ConvergenceError(RuntimeError):
    """An iterative numerical routine ran out of sweeps."""


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Ordered Kraus operators ``M_mu`` stacked as a ``(K, N, N)`` array.

    ``apply`` sums the terms ``M rho M^dagger`` in a canonical order fixed by
    the operator contents, so permuting the list gives bit-identical output.
    """

    kraus_ops: np.ndarray
    label: str = "channel"
    _order: tuple = field(init=False, repr=False)

    def __post_init__(self):
        ops = np.asarray(self.kraus_ops, dtype=complex)
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2] or ops.shape[0] == 0:
            raise ValueError(f"Kraus operators must stack to (K, N, N), got {ops.shape}")
        ops = np.ascontiguousarray(ops)
        ops.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)
        order = sorted(range(len(ops)), key=lambda i: ops[i].tobytes())
        object.__setattr__(self, "_order", tuple(order))

    @property
    def dim(self) -> int:
        return self.kraus_ops.shape[1]

    def __len__(self) -> int:
        return self.kraus_ops.shape[0]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply(self, rho)


def apply(channel: KrausChannel, rho: np.ndarray) -> np.ndarray:
    """``sum_mu M_mu rho M_mu^dagger``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (channel.dim, channel.dim):
        raise ValueError(f"state shape {rho.shape} does not match channel dimension {channel.dim}")
    M = channel.kraus_ops
    terms = M @ rho @ M.conj().transpose(0, 2, 1)
    order = channel._order
    out = terms[order[0]].copy()
    for i in order[1:]:
        out += terms[i]
    return out


def identity_channel(dim: int) -> KrausChannel:
    dim = check_dimension(dim)
    return KrausChannel(np.eye(dim, dtype=complex), label="identity")


def unitary_channel(u: np.ndarray, label: str = "unitary") -> KrausChannel:
    return KrausChannel(np.asarray(u, dtype=complex), label=label)


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"noise strength must lie in [0, 1], got {eps}")
    return eps


def depolarizing(dim: int, eps: float) -> KrausChannel:
    """``rho -> (1 - eps) rho + eps I/N`` as a uniform twirl over all N^2 chords."""
    dim = check_dimension(dim)
    eps = _check_eps(eps)
    ops = [np.sqrt(1 - eps) * np.eye(dim, dtype=complex)]
    scale = np.sqrt(eps) / dim
    ops += [scale * translation_operator((q, p), dim) for q in range(dim) for p in range(dim)]
    return KrausChannel(np.array(ops), label=f"dc(eps={eps})")


def check_dephasing_coefficients(c: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    """Validate ``C_ij``: real, symmetric, PSD and row-stochastic."""
    c = np.asarray(c)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"coefficient matrix must be square, got {c.shape}")
    if np.iscomplexobj(c):
        if np.max(np.abs(c.imag)) > atol:
            raise ValueError("coefficient matrix must be real")
        c = c.real
    if np.max(np.abs(c - c.T)) > atol:
        raise ValueError("coefficient matrix must be symmetric")
    if c.min() < -atol:
        raise ValueError("coefficient matrix has negative entries")
    if np.max(np.abs(c.sum(axis=1) - 1)) > atol:
        raise ValueError("coefficient matrix rows must sum to 1")
    if np.linalg.eigvalsh(c).min() < -atol:
        raise ValueError("coefficient matrix must be positive semidefinite")
    return c.astype(float)


def phase_damping(dim: int, eps: float, coeffs: np.ndarray | None = None) -> KrausChannel:
    """Generalized phase damping ``(1-eps) I.I + eps sum_ij C_ij P_ij.P_ij^dagger``.

    ``coeffs`` defaults to the identity (``C_ij = delta_ij``), which keeps
    the diagonal and scales every coherence by ``1 - eps``.
    """
    dim = check_dimension(dim)
    eps = _check_eps(eps)
    c = np.eye(dim) if coeffs is None else check_dephasing_coefficients(coeffs)
    if c.shape != (dim, dim):
        raise ValueError(f"coefficient matrix shape {c.shape} does not match N={dim}")
    ops = [np.sqrt(1 - eps) * np.eye(dim, dtype=complex)]
    for i, j in zip(*np.nonzero(c > 0)):
        P = np.zeros((dim, dim), dtype=complex)
        P[i, j] = np.sqrt(eps * c[i, j])
        ops.append(P)
    label = "pdc" if coeffs is None else "pdc-custom"
    return KrausChannel(np.array(ops), label=f"{label}(eps={eps})")


def random_dephasing_coefficients(dim: int, seed: int, spread: float = 0.3) -> np.ndarray:
    """Seeded random symmetric PSD doubly stochastic ``C``.

    Built as ``D (A A^T) D`` with ``A = I + spread * uniform`` and ``D`` a
    positive diagonal from symmetric Sinkhorn balancing; congruence keeps
    the Gram matrix PSD.
    """
    dim = check_dimension(dim)
    rng = np.random.default_rng(seed)
    A = np.eye(dim) + spread * rng.random((dim, dim))
    return sinkhorn_symmetric(A @ A.T)


def phase_damping_line(dim: int, eps: float, spec: LineSpec) -> KrausChannel:
    """Phase damping that diffuses uniformly over the chords on a line."""
    dim = check_dimension(dim)
    eps = _check_eps(eps)
    points = line_points(spec, dim)
    scale = np.sqrt(eps / len(points))
    ops = [np.sqrt(1 - eps) * np.eye(dim, dtype=complex)]
    ops += [scale * translation_operator(alpha, dim) for alpha in points]
    return KrausChannel(np.array(ops), label=f"pdc-line:{spec}(eps={eps})")


def sinkhorn_symmetric(kernel: np.ndarray, tol: float = SINKHORN_TOL,
                       max_sweeps: int = SINKHORN_MAX_SWEEPS) -> np.ndarray:
    """Scale a symmetric nonnegative matrix to ``D K D`` doubly stochastic.

    Each sweep replaces the scaling vector by the geometric mean of its row
    and column updates, ``d <- sqrt(d / (K d))``, then the result is
    symmetrized. Raises :class:`ConvergenceError` after ``max_sweeps``.
    """
    K = np.asarray(kernel, dtype=float)
    if np.max(np.abs(K - K.T)) > 0:
        K = (K + K.T) / 2
    if np.any(K.sum(axis=1) <= 0):
        raise ValueError("kernel has an empty row")
    d = 1.0 / np.sqrt(K.sum(axis=1))
    for _ in range(max_sweeps):
        P = d[:, None] * K * d[None, :]
        P = (P + P.T) / 2
        if np.max(np.abs(P.sum(axis=1) - 1)) <= tol:
            return P
        d = np.sqrt(d / (K @ d))
    raise ConvergenceError(f"Sinkhorn balancing did not converge in {max_sweeps} sweeps")


def gaussian_transition(dim: int, width: float) -> np.ndarray:
    """Symmetric doubly stochastic Gaussian transition matrix ``p_ij``.

    The kernel ``exp(-(i-j)^2 / 2 width^2)`` on levels ``0..N-1`` is balanced
    with :func:`sinkhorn_symmetric`; width is in level units.
    """
    dim = check_dimension(dim)
    width = float(width)
    if not width > 0:
        raise ValueError(f"Gaussian width must be positive, got {width}")
    i = np.arange(dim)
    kernel = np.exp(-((i[:, None] - i[None, :]) ** 2) / (2 * width**2))
    return sinkhorn_symmetric(kernel)


def amplitude_damping(dim: int, width: float) -> KrausChannel:
    """Generalized amplitude damping with 2N-1 Kraus operators.

    ``M_mu = sum_i sqrt(p[i, i+mu]) |i+mu><i|`` for ``mu = -(N-1) .. N-1``,
    with ``p`` from :func:`gaussian_transition`. There is no ``(1-eps)``
    identity term: the parameter is the Gaussian width.
    """
    dim = check_dimension(dim)
    p = gaussian_transition(dim, width)
    ops = np.zeros((2 * dim - 1, dim, dim), dtype=complex)
    for k, mu in enumerate(range(-dim + 1, dim)):
        i = np.arange(max(0, -mu), min(dim, dim - mu))
        ops[k, i + mu, i] = np.sqrt(p[i, i + mu])
    return KrausChannel(ops, label=f"adc(width={width})")


def adc_one_qubit(eps: float) -> KrausChannel:
    """Textbook qubit amplitude damping: decay ``|1> -> |0>`` with probability eps."""
    eps = _check_eps(eps)
    m0 = np.diag([1.0, np.sqrt(1 - eps)]).astype(complex)
    m1 = np.array([[0.0, np.sqrt(eps)], [0.0, 0.0]], dtype=complex)
    return KrausChannel(np.array([m0, m1]), label=f"adc1(eps={eps})")


@dataclass(frozen=True)
class CPTPReport:
    tp_deviation: float
    choi_min_eigenvalue: float
    passed: bool


def choi_matrix(channel: KrausChannel) -> np.ndarray:
    """Choi matrix ``sum_ij $(|i><j|) (x) |i><j|`` built from the Kraus vectors."""
    K, N, _ = channel.kraus_ops.shape
    # row-major flattening of M gives sum_ij M[i, j] |i>|j>, the (out, in) Choi vector
    vecs = channel.kraus_ops.reshape(K, N * N)
    return vecs.T @ vecs.conj()


def validate_cptp(channel: KrausChannel) -> CPTPReport:
    M = channel.kraus_ops
    gram = np.einsum("kji,kjl->il", M.conj(), M)
    dev = float(np.max(np.abs(gram - np.eye(channel.dim))))
    choi = choi_matrix(channel)
    lo = float(np.linalg.eigvalsh((choi + choi.conj().T) / 2).min())
    return CPTPReport(dev, lo, dev < TP_ATOL and lo > CHOI_FLOOR)


CHANNEL_KINDS = ("dc", "pdc", "pdc-line", "adc", "pdc-rand", "none")


def parse_channel(descriptor: str, dim: int, eps: float) -> KrausChannel:
    """Build a channel from a CLI-style descriptor.

    For ``adc`` the strength ``eps`` is used as the Gaussian width.
    """
    kind, _, arg = descriptor.strip().partition(":")
    if kind == "dc":
        return depolarizing(dim, eps)
    if kind == "pdc":
        return phase_damping(dim, eps)
    if kind == "pdc-line":
        return phase_damping_line(dim, eps, LineSpec.parse(arg))
    if kind == "adc":
        return amplitude_damping(dim, eps)
    if kind == "pdc-rand":
        if not arg:
            raise ValueError("pdc-rand needs a seed, e.g. pdc-rand:7")
        ch = phase_damping(dim, eps, random_dephasing_coefficients(dim, int(arg)))
        return KrausChannel(ch.kraus_ops, label=f"pdc-rand:{int(arg)}(eps={eps})")
    if kind == "none":
        return identity_channel(dim)
    raise ValueError(f"unknown channel descriptor {descriptor!r}; expected one of {CHANNEL_KINDS}")
