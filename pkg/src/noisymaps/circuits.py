"""Qubit circuits realizing the noise channels, simulated exactly.

Wires are numbered principal ``0..n-1`` (wire 0 is the most significant
bit of the level index), then environment, then ancilla. A circuit's
induced channel is found by pushing every principal basis operator
``|i><j|`` (tensored with the environment's initial state) through the
gates as a density operator, dephasing the measured environment wires and
tracing out everything but the principal register.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import channels, spectra

MAX_QUBITS = 12
# complex entries per simulation chunk (~64 MB)
_CHUNK_ENTRIES = 1 << 22

GATE_KINDS = ("ry", "controlled-ry", "cnot", "nqubit-controlled-swap", "not")

_X = np.array([[0, 1], [1, 0]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _controlled(u: np.ndarray) -> np.ndarray:
    d = u.shape[0]
    g = np.eye(2 * d, dtype=complex)
    g[d:, d:] = u
    return g


_FREDKIN = _controlled(np.eye(4, dtype=complex)[[0, 2, 1, 3]])


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        if self.kind in ("ry", "controlled-ry"):
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} needs a finite angle")
        if self.kind in ("controlled-ry", "cnot", "nqubit-controlled-swap") and len(self.controls) != 1:
            raise ValueError(f"{self.kind} takes exactly one control wire")
        if self.kind == "nqubit-controlled-swap" and len(self.targets) % 2:
            raise ValueError("controlled swap needs two registers of equal size")
        if self.kind in ("ry", "controlled-ry", "cnot", "not") and len(self.targets) != 1:
            raise ValueError(f"{self.kind} acts on a single target wire")
        if set(self.targets) & set(self.controls) or len(set(self.targets)) != len(self.targets):
            raise ValueError("gate wires must be distinct")

    @property
    def wires(self) -> tuple[int, ...]:
        return self.controls + self.targets

    def elementary(self) -> list[tuple[np.ndarray, tuple[int, ...]]]:
        """Matrices with the wires they act on, in application order."""
        if self.kind == "ry":
            return [(ry(self.angle), self.targets)]
        if self.kind == "not":
            return [(_X, self.targets)]
        if self.kind == "cnot":
            return [(_controlled(_X), self.wires)]
        if self.kind == "controlled-ry":
            return [(_controlled(ry(self.angle)), self.wires)]
        # an n-qubit controlled swap is n Fredkin gates sharing the control
        half = len(self.targets) // 2
        c = self.controls[0]
        return [(_FREDKIN, (c, a, b)) for a, b in zip(self.targets[:half], self.targets[half:])]


@dataclass(frozen=True)
class QubitCircuit:
    """Principal register plus environment and optional ancilla.

    ``env_init`` is the joint initial density matrix of the environment and
    ancilla wires (environment first).
    """

    n_principal: int
    n_env: int
    n_ancilla: int
    gates: tuple[Gate, ...]
    env_init: np.ndarray
    measure_env: bool = False
    name: str = field(default="circuit", compare=False)

    def __post_init__(self):
        if self.n_principal < 1 or self.n_env < 0 or self.n_ancilla not in (0, 1):
            raise ValueError("invalid register sizes")
        object.__setattr__(self, "gates", tuple(self.gates))
        nq = self.n_qubits
        for g in self.gates:
            if any(not 0 <= w < nq for w in g.wires):
                raise ValueError(f"gate {g} addresses a wire outside 0..{nq - 1}")
        d = 2 ** (self.n_env + self.n_ancilla)
        env = np.asarray(self.env_init, dtype=complex)
        if env.shape != (d, d):
            raise ValueError(f"env_init must be {d}x{d}, got {env.shape}")
        object.__setattr__(self, "env_init", env)

    @property
    def n_qubits(self) -> int:
        return self.n_principal + self.n_env + self.n_ancilla

    @property
    def dim(self) -> int:
        return 2**self.n_principal


def _apply(T: np.ndarray, gate: np.ndarray, wires: tuple[int, ...], nq: int) -> np.ndarray:
    # T has axes (batch, ket_0..ket_{nq-1}, bra_0..bra_{nq-1})
    k = len(wires)
    G = gate.reshape((2,) * (2 * k))
    ket = [1 + w for w in wires]
    T = np.tensordot(G, T, axes=(list(range(k, 2 * k)), ket))
    T = np.moveaxis(T, list(range(k)), ket)
    bra = [1 + nq + w for w in wires]
    T = np.tensordot(G.conj(), T, axes=(list(range(k, 2 * k)), bra))
    return np.moveaxis(T, list(range(k)), bra)


def _run_batch(circuit: QubitCircuit, basis: np.ndarray) -> np.ndarray:
    """Evolve a batch of principal operators, return the reduced outputs."""
    nq = circuit.n_qubits
    N = circuit.dim
    D = circuit.env_init.shape[0]
    B = basis.shape[0]
    full = np.einsum("bij,ef->biejf", basis, circuit.env_init).reshape(B, N * D, N * D)
    T = full.reshape((B,) + (2,) * (2 * nq))
    for gate in circuit.gates:
        for mat, wires in gate.elementary():
            T = _apply(T, mat, wires, nq)
    T = T.reshape(B, N, D, N, D)
    if circuit.measure_env:
        # dephase the measured environment wires in the computational basis
        env = 2**circuit.n_env
        anc = 2**circuit.n_ancilla
        T = T.reshape(B, N, env, anc, N, env, anc)
        mask = np.eye(env)[None, None, :, None, None, :, None]
        T = (T * mask).reshape(B, N, D, N, D)
    return np.einsum("biaja->bij", T)


def induced_channel(circuit: QubitCircuit) -> np.ndarray:
    """Exact superoperator (row-major convention) induced on the principal register."""
    nq = circuit.n_qubits
    if nq > MAX_QUBITS:
        raise ValueError(f"circuit has {nq} qubits; simulation ceiling is {MAX_QUBITS}")
    N = circuit.dim
    basis = np.zeros((N * N, N, N), dtype=complex)
    basis[np.arange(N * N), np.arange(N * N) // N, np.arange(N * N) % N] = 1.0
    chunk = max(1, _CHUNK_ENTRIES // 4**nq)
    outs = [_run_batch(circuit, basis[s:s + chunk]) for s in range(0, N * N, chunk)]
    out = np.concatenate(outs, axis=0)
    return out.reshape(N * N, N * N).T.copy()


def dc_circuit(n: int, eps: float) -> QubitCircuit:
    """Depolarizing circuit: ancilla-controlled swap with a maximally mixed environment."""
    eps = channels._check_eps(eps)
    env = np.eye(2**n) / 2**n
    anc = np.diag([1 - eps, eps])
    swap = Gate("nqubit-controlled-swap", targets=tuple(range(2 * n)), controls=(2 * n,))
    return QubitCircuit(n, n, 1, (swap,), np.kron(env, anc), measure_env=False, name=f"dc(n={n}, eps={eps})")


def pdc_circuit(n: int, eps: float) -> QubitCircuit:
    """Phase damping circuit: qubit j controls ``Ry(theta)`` on environment qubit j.

    ``cos(theta/2) = 1 - eps``. Each principal qubit sees an independent
    qubit dephasing, so a coherence between levels at Hamming distance h is
    scaled by ``(1 - eps)**h``.
    """
    eps = channels._check_eps(eps)
    theta = 2 * math.acos(1 - eps)
    gates = [Gate("controlled-ry", targets=(n + j,), controls=(j,), angle=theta) for j in range(n)]
    env = np.zeros((2**n, 2**n))
    env[0, 0] = 1.0
    return QubitCircuit(n, n, 0, gates, env, measure_env=True, name=f"pdc(n={n}, eps={eps})")


@dataclass(frozen=True)
class RotationSchedule:
    """Angle pairs ``(theta_j^0, theta_j^1)`` per qubit j, each in [0, 2 pi)."""

    angles: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pairs = tuple((float(a), float(b)) for a, b in self.angles)
        for pair in pairs:
            for t in pair:
                if not (math.isfinite(t) and 0.0 <= t < 2 * math.pi):
                    raise ValueError(f"rotation angle {t} outside [0, 2 pi)")
        object.__setattr__(self, "angles", pairs)

    @property
    def n(self) -> int:
        return len(self.angles)

    @classmethod
    def random(cls, n: int, seed: int) -> "RotationSchedule":
        rng = np.random.default_rng(seed)
        return cls(tuple(map(tuple, rng.uniform(0, 2 * math.pi, size=(n, 2)))))


def adc_circuit(n: int, schedule: RotationSchedule) -> QubitCircuit:
    """Amplitude damping circuit with state-dependent environment rotations.

    Per pair j the environment qubit is rotated by ``theta_j^0`` when the
    principal qubit is |0> (NOT, controlled-Ry, NOT) and by ``theta_j^1``
    when it is |1>; then environment qubit j flips principal qubit j.
    """
    if schedule.n != n:
        raise ValueError(f"schedule has {schedule.n} angle pairs for {n} qubits")
    gates = []
    for j, (t0, t1) in enumerate(schedule.angles):
        gates += [
            Gate("not", targets=(j,)),
            Gate("controlled-ry", targets=(n + j,), controls=(j,), angle=t0),
            Gate("not", targets=(j,)),
            Gate("controlled-ry", targets=(n + j,), controls=(j,), angle=t1),
        ]
    gates += [Gate("cnot", targets=(j,), controls=(n + j,)) for j in range(n)]
    env = np.zeros((2**n, 2**n))
    env[0, 0] = 1.0
    return QubitCircuit(n, n, 0, gates, env, measure_env=True, name=f"adc(n={n})")


def _bits(i: int, n: int) -> list[int]:
    return [(i >> (n - 1 - j)) & 1 for j in range(n)]


def adc_product_probabilities(schedule: RotationSchedule) -> np.ndarray:
    """``P[i, i xor s] = prod_j f(s_j, theta_j^{l_j})`` with f = cos^2 or sin^2 of half-angles."""
    n = schedule.n
    N = 2**n
    P = np.zeros((N, N))
    for i in range(N):
        l = _bits(i, n)
        for s in range(N):
            prob = 1.0
            for j, sj in enumerate(_bits(s, n)):
                half = schedule.angles[j][l[j]] / 2
                prob *= math.sin(half) ** 2 if sj else math.cos(half) ** 2
            P[i, i ^ s] = prob
    return P


def transition_probabilities(superop: np.ndarray) -> np.ndarray:
    """``P[i, k] = <k| $(|i><i|) |k>`` read off a row-major superoperator."""
    N = int(round(math.sqrt(superop.shape[0])))
    d = np.arange(N) * (N + 1)
    return superop[np.ix_(d, d)].real.T.copy()


def qubit_dephasing_product(n: int, eps: float) -> np.ndarray:
    """Superoperator of n independent qubit phase dampings (factor 1-eps each)."""
    single = spectra.to_matrix(channels.phase_damping(2, eps))
    # reorder the n-fold kron of single-qubit superoperators into row-major on 2^n levels
    S = single
    for _ in range(n - 1):
        S = np.kron(S, single)
    N = 2**n
    axes = [2 * j for j in range(n)] + [2 * j + 1 for j in range(n)]
    perm = axes + [2 * n + a for a in axes]
    S = S.reshape((2,) * (4 * n)).transpose(perm)
    return S.reshape(N * N, N * N)


def circuit_verify(which: str, n: int, eps: float = 0.0, seed: int = 0) -> dict:
    """Certify a circuit against its analytic channel; returns a JSON-ready report."""
    if which == "dc":
        circ = dc_circuit(n, eps)
        target = spectra.to_matrix(channels.depolarizing(2**n, eps))
        tol = 1e-10
    elif which == "pdc":
        circ = pdc_circuit(n, eps)
        target = spectra.to_matrix(channels.phase_damping(2**n, eps))
        tol = 1e-10
    elif which == "adc":
        schedule = RotationSchedule.random(n, seed)
        circ = adc_circuit(n, schedule)
        tol = 1e-12
    else:
        raise ValueError(f"unknown circuit {which!r}; expected dc, pdc or adc")
    S = induced_channel(circ)
    report = {"which": which, "qubits": n, "eps": eps, "seed": seed}
    if which == "adc":
        dev = np.max(np.abs(transition_probabilities(S) - adc_product_probabilities(schedule)))
        report["angles"] = [list(pair) for pair in schedule.angles]
    else:
        dev = np.max(np.abs(S - target))
    if which == "pdc":
        report["product_form_deviation"] = float(np.max(np.abs(S - qubit_dephasing_product(n, eps))))
    report["max_deviation"] = float(dev)
    report["tolerance"] = tol
    report["pass"] = bool(dev < tol)
    return report
