"""Superoperator matrices, dense spectra and degeneracy clustering.

Operators are vectorized row-major, ``vec(rho)[i*N + j] = rho[i, j]``, so that
``vec(X rho Y^dagger) = kron(X, conj(Y)) @ vec(rho)``. Spectral statements
do not depend on this choice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .channels import KrausChannel

DEGENERACY_TOL = 1e-8
ADC_DEGENERACY_TOL = 1e-6


class EigensolverError(RuntimeError):
    pass


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1)


def unvec(v: np.ndarray) -> np.ndarray:
    n = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape(n, n)


def to_matrix(channel: KrausChannel) -> np.ndarray:
    """``sum_mu kron(M_mu, conj(M_mu))`` as one ``N^2 x N^2`` array."""
    M = channel.kraus_ops
    K, N, _ = M.shape
    # A[(i,k), mu] = M_mu[i, k]; then S[(i,j),(k,l)] = sum_mu A[(i,k)] conj(A[(j,l)])
    A = M.transpose(1, 2, 0).reshape(N * N, K)
    S4 = (A @ A.conj().T).reshape(N, N, N, N)
    return np.ascontiguousarray(S4.transpose(0, 2, 1, 3)).reshape(N * N, N * N)


def unitary_superoperator(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    return np.kron(u, u.conj())


def compose(channel: KrausChannel, u: np.ndarray) -> KrausChannel:
    """Channel after unitary: ``rho -> $(U rho U^dagger)``, Kraus ops ``M_mu U``."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (channel.dim, channel.dim):
        raise ValueError(f"unitary shape {u.shape} does not match channel dimension {channel.dim}")
    return KrausChannel(channel.kraus_ops @ u, label=f"{channel.label} o U")


def sort_eigenvalues(eigs: np.ndarray) -> np.ndarray:
    """Descending modulus, then ascending phase in (-pi, pi]."""
    eigs = np.asarray(eigs, dtype=complex)
    # round away roundoff jitter so near-equal moduli order by phase
    mod = np.round(np.abs(eigs), 12)
    order = np.lexsort((np.angle(eigs), -mod))
    return eigs[order]


def cluster_eigenvalues(eigs, tol: float) -> tuple[np.ndarray, list[tuple[complex, int]]]:
    """Single-linkage clustering of points in the complex plane at radius ``tol``.

    Returns per-point cluster ids (numbered by first appearance in the
    input order) and ``(mean value, multiplicity)`` for each cluster.
    """
    if not tol > 0:
        raise ValueError("clustering tolerance must be positive")
    z = np.asarray(eigs, dtype=complex)
    n = z.size
    if n == 0:
        return np.zeros(0, dtype=int), []
    pts = np.column_stack([z.real, z.imag])
    pairs = cKDTree(pts).query_pairs(tol, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    remap: dict[int, int] = {}
    ids = np.array([remap.setdefault(lab, len(remap)) for lab in labels])
    clusters = []
    for c in range(len(remap)):
        members = z[ids == c]
        clusters.append((complex(members.mean()), int(members.size)))
    return ids, clusters


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    cluster_ids: np.ndarray
    clusters: list
    tol: float

    def multiplicity_near(self, value: complex, tol: float | None = None) -> int:
        tol = self.tol if tol is None else tol
        return int(np.sum(np.abs(self.eigenvalues - value) <= tol))


def eigenvalues(mat: np.ndarray) -> np.ndarray:
    try:
        eigs = np.linalg.eigvals(mat)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"dense eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(eigs)):
        raise EigensolverError("eigensolver returned non-finite values")
    return sort_eigenvalues(eigs)


def spectrum(mat: np.ndarray, tol: float = DEGENERACY_TOL) -> SpectrumReport:
    """All eigenvalues of a dense superoperator matrix, sorted and clustered."""
    eigs = eigenvalues(np.asarray(mat, dtype=complex))
    ids, clusters = cluster_eigenvalues(eigs, tol)
    return SpectrumReport(eigs, ids, clusters, tol)


def chord_eigenvalues(dim: int, eps: float, points) -> np.ndarray:
    """Analytic spectrum of ``(1-eps) I.I + (eps/R) sum_{a in points} T_a.T_a^dagger``.

    Each chord ``T_b`` is an eigenoperator with eigenvalue
    ``(1-eps) + (eps/R) sum_a w(a, b)``, ``w`` the commutation phase.
    Returned in the order of ``b = (q, p)`` over the grid, unsorted.
    """
    pts = np.asarray(list(points), dtype=np.int64)
    q, p = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    qb, pb = q.reshape(-1), p.reshape(-1)
    # w(a, b) = exp(2 pi i (p_a q_b - q_a p_b) / N)
    symp = (np.outer(pts[:, 1], qb) - np.outer(pts[:, 0], pb)) % dim
    phases = np.exp(2j * np.pi * symp / dim).sum(axis=0)
    return (1 - eps) + eps * phases / len(pts)
