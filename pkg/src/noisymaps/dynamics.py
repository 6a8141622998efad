"""Iterated noisy evolution ``rho_{t+1} = $(U rho_t U^dagger)``.

Initial-state descriptors::

    position:n | momentum:k | coherent:q,p | cat:q1,p1,q2,p2
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import hilbert
from .channels import parse_channel
from .maps import parse_map
from .phase_space import WignerGrid, wigner_function
from .spectra import compose, to_matrix


def initial_state(descriptor: str, dim: int) -> np.ndarray:
    """Density matrix for an initial-state descriptor."""
    kind, _, arg = descriptor.strip().partition(":")
    try:
        if kind == "position":
            psi = hilbert.position_state(int(arg), dim)
        elif kind == "momentum":
            psi = hilbert.momentum_state(int(arg), dim)
        elif kind == "coherent":
            q, p = (float(x) for x in arg.split(","))
            psi = hilbert.coherent_state((q, p), dim)
        elif kind == "cat":
            q1, p1, q2, p2 = (float(x) for x in arg.split(","))
            psi = hilbert.cat_state((q1, p1), (q2, p2), dim)
        else:
            raise ValueError(f"unknown initial state kind {kind!r}")
    except (TypeError, IndexError) as exc:
        raise ValueError(f"bad initial state descriptor {descriptor!r}: {exc}") from exc
    return hilbert.density_matrix(psi)


@dataclass(frozen=True)
class EvolutionConfig:
    map: str = "none"
    channel: str = "none"
    dim: int = 32
    eps: float = 0.0
    steps: int = 10
    initial: str = "momentum:0"

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 0:
            raise ValueError(f"steps must be a nonnegative integer, got {self.steps}")
        hilbert.check_dimension(self.dim)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray  # (steps + 1, N, N)
    config: EvolutionConfig | None = None

    def __len__(self) -> int:
        return self.states.shape[0]

    def __getitem__(self, k: int) -> np.ndarray:
        return self.states[k]


def step_superoperator(config: EvolutionConfig) -> np.ndarray:
    """Matrix of one noisy step ``$ o U`` for the configured map and channel."""
    u = parse_map(config.map, config.dim)
    channel = parse_channel(config.channel, config.dim, config.eps)
    return to_matrix(compose(channel, u))


def evolve(config: EvolutionConfig) -> Trajectory:
    S = step_superoperator(config)
    rho = initial_state(config.initial, config.dim)
    N = config.dim
    states = np.empty((config.steps + 1, N, N), dtype=complex)
    states[0] = rho
    v = rho.reshape(-1)
    for k in range(1, config.steps + 1):
        v = S @ v
        states[k] = v.reshape(N, N)
    return Trajectory(states, config)


def entropy_series(traj: Trajectory) -> np.ndarray:
    return np.array([hilbert.linear_entropy(rho) for rho in traj.states])


def grover_success_series(traj: Trajectory, marked) -> np.ndarray:
    """Probability of measuring a marked item, per iteration."""
    idx = sorted({int(w) for w in marked})
    return traj.states[:, idx, idx].real.sum(axis=1)


def wigner_series(traj: Trajectory, stride: int = 1) -> list[WignerGrid]:
    if stride < 1:
        raise ValueError("stride must be >= 1")
    return [wigner_function(rho) for rho in traj.states[::stride]]


class Propagator:
    """Evaluates ``S^k v`` for large k by binary powering with cached squares."""

    def __init__(self, superop: np.ndarray):
        self._squares = [np.asarray(superop, dtype=complex)]

    def _square(self, j: int) -> np.ndarray:
        while len(self._squares) <= j:
            last = self._squares[-1]
            self._squares.append(last @ last)
        return self._squares[j]

    def apply(self, v: np.ndarray, k: int) -> np.ndarray:
        if k < 0:
            raise ValueError("power must be nonnegative")
        out = np.asarray(v, dtype=complex)
        j = 0
        while k:
            if k & 1:
                out = self._square(j) @ out
            k >>= 1
            j += 1
        return out


def entropy_at(superop: np.ndarray, rho0: np.ndarray, iterations, propagator: Propagator | None = None) -> np.ndarray:
    """Linear entropy of ``S^k rho0`` at the requested iteration counts."""
    prop = propagator or Propagator(superop)
    N = rho0.shape[0]
    v0 = rho0.reshape(-1)
    return np.array([hilbert.linear_entropy(prop.apply(v0, int(k)).reshape(N, N)) for k in iterations])


def first_crossing(superop: np.ndarray, rho0: np.ndarray, level: float, max_iter: int = 1 << 24) -> int:
    """Smallest k with linear entropy above ``level``.

    Assumes the entropy is nondecreasing in k, which holds for unital
    channels (their purity never increases). Uses doubling then bisection.
    """
    prop = Propagator(superop)

    def above(k: int) -> bool:
        return entropy_at(superop, rho0, [k], prop)[0] > level

    if above(0):
        return 0
    hi = 1
    while not above(hi):
        hi *= 2
        if hi > max_iter:
            raise RuntimeError(f"entropy stays below {level} for {max_iter} iterations")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if above(mid):
            hi = mid
        else:
            lo = mid
    return hi


def dc_entropy_closed_form(dim: int, eps: float, steps: int) -> np.ndarray:
    """Entropy of ``(dc o U)^k`` applied to any pure state, k = 0..steps.

    The depolarizing twirl commutes with every unitary, so
    ``rho_k = a U^k rho U^-k + (1 - a) I/N`` with ``a = (1 - eps)^k``.
    """
    a = (1.0 - eps) ** np.arange(steps + 1)
    return -np.log(a**2 + (2 * a * (1 - a) + (1 - a) ** 2) / dim)
