"""Density-matrix simulation with calibration-driven gate noise and SPSA.

Per gate: ideal unitary conjugation, then a depolarizing channel, then
thermal relaxation (amplitude damping from T1 plus pure dephasing from
T2), in that fixed order.  One-qubit gates use each operand's calibrated
error rate and the global one-qubit gate time; two-qubit gates use the
pair's CNOT error through the 15-Pauli two-qubit depolarizing channel and
the pair's gate time on both operands.  Multi-qubit Pauli rotations fall
back to per-operand one-qubit channels (we simulate gates, we do not
transpile).  Readout error is never applied.

Circuits may address more qubits than the calibration covers (the device
table has five qubits); lookups wrap around the table and unknown pairs
use the table average.  Both policies are deterministic and documented
here because the noisy experiments are property-based, not device-exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .pauli import PauliString, PauliSum, to_matrix
from .statevector import GateOp, StateVector, apply_gate

TRACE_TOL = 1e-10
HERMITICITY_TOL = 1e-10
PSD_TOL = -1e-8
DEFAULT_GATE_TIME_1Q_NS = 35.6
DEFAULT_SHOTS = 10_000


class CalibrationError(ValueError):
    """Malformed or physically impossible calibration data."""


@dataclass(frozen=True)
class QubitCalibration:
    t1_us: float
    t2_us: float
    err_1q: float
    freq_ghz: Optional[float] = None

    def __post_init__(self):
        if self.t1_us <= 0 or self.t2_us <= 0:
            raise CalibrationError("T1 and T2 must be positive")
        if self.t2_us > 2.0 * self.t1_us + 1e-9:
            raise CalibrationError(f"T2 = {self.t2_us} exceeds 2*T1")
        if not 0.0 <= self.err_1q <= 1.0:
            raise CalibrationError(f"1q error rate {self.err_1q} outside [0, 1]")


@dataclass(frozen=True)
class PairCalibration:
    err_cnot: float
    time_ns: float

    def __post_init__(self):
        if not 0.0 <= self.err_cnot <= 1.0:
            raise CalibrationError(f"CNOT error rate {self.err_cnot} outside [0, 1]")
        if self.time_ns <= 0:
            raise CalibrationError("gate time must be positive")


@dataclass(frozen=True)
class CalibrationData:
    qubits: Tuple[QubitCalibration, ...]
    pairs: Dict[Tuple[int, int], PairCalibration]
    gate_time_1q_ns: float = DEFAULT_GATE_TIME_1Q_NS

    def qubit(self, q: int) -> QubitCalibration:
        return self.qubits[q % len(self.qubits)]

    def pair(self, a: int, b: int) -> PairCalibration:
        key = (min(a, b), max(a, b))
        hit = self.pairs.get(key)
        if hit is not None:
            return hit
        if not self.pairs:
            raise CalibrationError("calibration has no pair records")
        errs = [p.err_cnot for p in self.pairs.values()]
        times = [p.time_ns for p in self.pairs.values()]
        return PairCalibration(sum(errs) / len(errs), sum(times) / len(times))


def parse_calibration(text: str) -> CalibrationData:
    """Grammar: ``gate_time_1q_ns <t>``, ``qubit <q> key=value ...`` records
    (t1_us, t2_us, err_1q required; freq_ghz optional; 'inf' allowed for
    T1/T2), and ``pair <a>,<b> err_cnot=<e> time_ns=<t>`` records."""
    gate_time = DEFAULT_GATE_TIME_1Q_NS
    qubit_rows: Dict[int, QubitCalibration] = {}
    pairs: Dict[Tuple[int, int], PairCalibration] = {}

    def parse_kv(tokens: Sequence[str], lineno: int) -> Dict[str, float]:
        out = {}
        for token in tokens:
            key, sep, value = token.partition("=")
            if not sep:
                raise CalibrationError(
                    f"line {lineno}: expected key=value, got {token!r}")
            out[key] = float(value)
        return out

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "gate_time_1q_ns":
            gate_time = float(rest[0])
        elif head == "qubit":
            index = int(rest[0])
            kv = parse_kv(rest[1:], lineno)
            missing = {"t1_us", "t2_us", "err_1q"} - set(kv)
            if missing:
                raise CalibrationError(
                    f"line {lineno}: qubit {index} missing {sorted(missing)}")
            qubit_rows[index] = QubitCalibration(
                kv["t1_us"], kv["t2_us"], kv["err_1q"], kv.get("freq_ghz"))
        elif head == "pair":
            a, b = (int(t) for t in rest[0].split(","))
            kv = parse_kv(rest[1:], lineno)
            missing = {"err_cnot", "time_ns"} - set(kv)
            if missing:
                raise CalibrationError(
                    f"line {lineno}: pair {a},{b} missing {sorted(missing)}")
            pairs[(min(a, b), max(a, b))] = PairCalibration(
                kv["err_cnot"], kv["time_ns"])
        else:
            raise CalibrationError(f"line {lineno}: unknown record {head!r}")
    if not qubit_rows:
        raise CalibrationError("calibration has no qubit records")
    n = max(qubit_rows) + 1
    if set(qubit_rows) != set(range(n)):
        raise CalibrationError("qubit records must cover 0..n-1")
    return CalibrationData(tuple(qubit_rows[q] for q in range(n)), pairs,
                           gate_time)


def load_calibration(path: str) -> CalibrationData:
    with open(path) as fh:
        return parse_calibration(fh.read())


def zero_noise_calibration(n_qubits: int = 1) -> CalibrationData:
    row = QubitCalibration(math.inf, math.inf, 0.0)
    return CalibrationData((row,) * n_qubits,
                           {(0, 1): PairCalibration(0.0, 1.0)})


# ---------------------------------------------------------------------------
# Density matrices and channels.
# ---------------------------------------------------------------------------

class DensityMatrix:
    __slots__ = ("n_qubits", "matrix")

    def __init__(self, n_qubits: int, matrix: Optional[np.ndarray] = None):
        self.n_qubits = n_qubits
        dim = 1 << n_qubits
        if matrix is None:
            self.matrix = np.zeros((dim, dim), dtype=complex)
            self.matrix[0, 0] = 1.0
        else:
            matrix = np.asarray(matrix, dtype=complex)
            if matrix.shape != (dim, dim):
                raise ValueError(f"expected {dim}x{dim} matrix")
            self.matrix = matrix.copy()

    @classmethod
    def from_statevector(cls, state: StateVector) -> "DensityMatrix":
        amps = state.amplitudes
        return cls(state.n_qubits, np.outer(amps, amps.conj()))

    @classmethod
    def totally_mixed(cls, n_qubits: int) -> "DensityMatrix":
        dim = 1 << n_qubits
        return cls(n_qubits, np.eye(dim, dtype=complex) / dim)

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.n_qubits, self.matrix)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def validate(self, check_psd: bool = False):
        if abs(self.trace() - 1.0) > TRACE_TOL:
            raise ValueError(f"trace drifted to {self.trace()!r}")
        if np.max(np.abs(self.matrix - self.matrix.conj().T)) > HERMITICITY_TOL:
            raise ValueError("density matrix lost Hermiticity")
        if check_psd and np.linalg.eigvalsh(self.matrix).min() < PSD_TOL:
            raise ValueError("density matrix lost positivity")

    def expectation(self, op: PauliSum) -> float:
        mat = _dense_operator(op, self.n_qubits)
        # Tr(M rho) without the full matmul
        value = np.einsum("ij,ji->", mat, self.matrix)
        return float(value.real)


_DENSE_OP_CACHE: Dict[Tuple[int, tuple], np.ndarray] = {}


def _dense_operator(op: PauliSum, n_qubits: int) -> np.ndarray:
    key = (n_qubits, tuple(sorted((s.items, c) for s, c in op.items())))
    hit = _DENSE_OP_CACHE.get(key)
    if hit is None:
        hit = to_matrix(op.embed(n_qubits))
        _DENSE_OP_CACHE[key] = hit
    return hit


_GATE_UNITARY_CACHE: Dict[tuple, np.ndarray] = {}


def gate_unitary(gate: GateOp, n_qubits: int) -> np.ndarray:
    """Full-register unitary of a gate.

    Pauli rotations combine the cached dense string matrix with their
    (continuously varying) angle; every other gate is built column-wise
    through the statevector path and cached, so both simulators share one
    gate semantics.
    """
    if gate.kind == "PAULI_ROT":
        mat = _dense_operator(PauliSum(gate.string.n_qubits,
                                       {gate.string: 1.0}), n_qubits)
        half = gate.angle / 2.0
        dim = 1 << n_qubits
        return math.cos(half) * np.eye(dim) - 1j * math.sin(half) * mat
    key = (n_qubits, gate.kind, gate.targets, gate.controls, gate.angle)
    hit = _GATE_UNITARY_CACHE.get(key)
    if hit is None:
        dim = 1 << n_qubits
        cols = np.zeros((dim, dim), dtype=complex)
        for index in range(dim):
            state = StateVector(n_qubits)
            state.amplitudes[0] = 0.0
            state.amplitudes[index] = 1.0
            apply_gate(state, gate)
            cols[:, index] = state.amplitudes
        hit = cols
        _GATE_UNITARY_CACHE[key] = hit
    return hit


def embed_kraus(kraus: Sequence[np.ndarray], qubit: int,
                n_qubits: int) -> List[np.ndarray]:
    """Full-register Kraus matrices of a one-qubit channel (oracle route)."""
    out = []
    for k in kraus:
        full = np.ones((1, 1), dtype=complex)
        for q in range(n_qubits):
            full = np.kron(full, k if q == qubit else np.eye(2))
        out.append(full)
    return out


def depolarizing_kraus(p: float) -> List[np.ndarray]:
    """rho -> (1-p) rho + p I/2; Bloch vector contracts by (1-p)."""
    if not 0.0 <= p <= 1.0:
        raise CalibrationError("depolarizing rate outside [0, 1]")
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    return [math.sqrt(1 - 0.75 * p) * np.eye(2, dtype=complex),
            math.sqrt(p / 4.0) * x, math.sqrt(p / 4.0) * y,
            math.sqrt(p / 4.0) * z]


def two_qubit_depolarizing_kraus(p: float) -> List[np.ndarray]:
    """15-Pauli channel rho -> (1-p) rho + p I/4 on a qubit pair."""
    if not 0.0 <= p <= 1.0:
        raise CalibrationError("depolarizing rate outside [0, 1]")
    singles = [np.eye(2, dtype=complex),
               np.array([[0, 1], [1, 0]], dtype=complex),
               np.array([[0, -1j], [1j, 0]], dtype=complex),
               np.array([[1, 0], [0, -1]], dtype=complex)]
    out = [math.sqrt(1 - 15.0 * p / 16.0) * np.kron(singles[0], singles[0])]
    for i in range(4):
        for j in range(4):
            if i == j == 0:
                continue
            out.append(math.sqrt(p / 16.0) * np.kron(singles[i], singles[j]))
    return out


def thermal_relaxation_kraus(t_ns: float, t1_us: float,
                             t2_us: float) -> List[np.ndarray]:
    """Amplitude damping p1 = 1 - exp(-t/T1) composed with the pure
    dephasing left over once T2 <= 2 T1 is accounted for."""
    if t1_us <= 0 or t2_us <= 0:
        raise CalibrationError("T1 and T2 must be positive")
    t_us = t_ns * 1e-3
    gamma = 0.0 if math.isinf(t1_us) else 1.0 - math.exp(-t_us / t1_us)
    # residual off-diagonal decay after amplitude damping's exp(-t/2T1)
    exponent = (0.0 if math.isinf(t2_us) else t_us / t2_us) \
        - (0.0 if math.isinf(t1_us) else t_us / (2.0 * t1_us))
    dephase = max(0.0, 1.0 - math.exp(-exponent))
    p_z = 0.5 * dephase
    damp = [np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=complex),
            np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=complex)]
    if p_z == 0.0:
        return damp
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    phase = [math.sqrt(1 - p_z) * np.eye(2, dtype=complex),
             math.sqrt(p_z) * z]
    return [p @ d for p in phase for d in damp]


def apply_kraus(rho: DensityMatrix, kraus: Sequence[np.ndarray]) -> DensityMatrix:
    out = np.zeros_like(rho.matrix)
    for k in kraus:
        out += k @ rho.matrix @ k.conj().T
    rho.matrix = out
    return rho


def channel_superoperator(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Row-major-vec superoperator sum_k K (x) conj(K) of a local channel."""
    dim = kraus[0].shape[0]
    out = np.zeros((dim * dim, dim * dim), dtype=complex)
    for k in kraus:
        out += np.kron(k, k.conj())
    return out


def _apply_local_superop(rho: DensityMatrix, superop: np.ndarray,
                         qubits: Sequence[int]):
    """Apply a k-qubit channel superoperator on the named qubits.

    Works on the (2,)*2n tensor view of rho, so a one-qubit channel costs
    one 4 x (4, 4^{n-1}) matmul rather than full-space Kraus conjugations.
    """
    n = rho.n_qubits
    k = len(qubits)
    tensor = rho.matrix.reshape((2,) * (2 * n))
    axes = tuple(qubits) + tuple(n + q for q in qubits)
    moved = np.moveaxis(tensor, axes, range(2 * k))
    shape = moved.shape
    flat = np.ascontiguousarray(moved).reshape(1 << (2 * k), -1)
    flat = superop @ flat
    restored = np.moveaxis(flat.reshape(shape), range(2 * k), axes)
    rho.matrix = np.ascontiguousarray(restored).reshape(rho.matrix.shape)


_CHANNEL_CACHE: Dict[tuple, List[Tuple[np.ndarray, Tuple[int, ...]]]] = {}


def _gate_noise_channels(gate: GateOp, calib: CalibrationData,
                         n: int) -> List[Tuple[np.ndarray, Tuple[int, ...]]]:
    """(superoperator, qubits) pairs for a gate's noise, cached per gate.

    Per-operand depolarizing and relaxation compose into one 4x4
    superoperator; the two-qubit depolarizing channel is a 16x16 on the
    pair.  Identity channels are dropped.
    """
    key = (id(calib), n, gate.kind, gate.targets, gate.controls,
           None if gate.string is None else gate.string.items)
    hit = _CHANNEL_CACHE.get(key)
    if hit is not None:
        return hit
    channels: List[Tuple[np.ndarray, Tuple[int, ...]]] = []

    def push(kraus: Sequence[np.ndarray], qubits: Tuple[int, ...]):
        superop = channel_superoperator(kraus)
        if not np.allclose(superop, np.eye(superop.shape[0]), atol=1e-15):
            channels.append((superop, qubits))

    operands = sorted(set(gate.operands()))
    is_two_qubit = gate.kind in ("CNOT", "CONTROLLED") and len(operands) == 2
    if is_two_qubit:
        pair = calib.pair(operands[0], operands[1])
        if pair.err_cnot > 0.0:
            push(two_qubit_depolarizing_kraus(pair.err_cnot), tuple(operands))
        for q in operands:
            row = calib.qubit(q)
            push(thermal_relaxation_kraus(pair.time_ns, row.t1_us, row.t2_us),
                 (q,))
    else:
        for q in operands:
            row = calib.qubit(q)
            combined = channel_superoperator(
                thermal_relaxation_kraus(calib.gate_time_1q_ns, row.t1_us,
                                         row.t2_us))
            if row.err_1q > 0.0:
                combined = combined @ channel_superoperator(
                    depolarizing_kraus(row.err_1q))
            if not np.allclose(combined, np.eye(4), atol=1e-15):
                channels.append((combined, (q,)))
    _CHANNEL_CACHE[key] = channels
    return channels


def apply_noisy_gate(rho: DensityMatrix, gate: GateOp,
                     calib: CalibrationData) -> DensityMatrix:
    """Ideal unitary, then depolarizing, then relaxation on the operands."""
    n = rho.n_qubits
    unitary = gate_unitary(gate, n)
    rho.matrix = unitary @ rho.matrix @ unitary.conj().T
    for superop, qubits in _gate_noise_channels(gate, calib, n):
        _apply_local_superop(rho, superop, qubits)
    return rho


# ---------------------------------------------------------------------------
# Shot-sampled expectations and the noisy objective.
# ---------------------------------------------------------------------------

@dataclass
class ShotSampler:
    """Binomial sampler around exact noisy expectations; shots=0 is the
    exact-value sentinel."""

    shots: int = DEFAULT_SHOTS
    rng: np.random.Generator = field(
        default_factory=lambda: np.random.default_rng(0))

    def __post_init__(self):
        if self.shots < 0:
            raise ValueError("shots must be >= 0 (0 = exact sentinel)")

    def sample(self, exact_value: float) -> float:
        if self.shots == 0:
            return exact_value
        p = min(1.0, max(0.0, 0.5 * (1.0 + exact_value)))
        hits = self.rng.binomial(self.shots, p)
        return 2.0 * hits / self.shots - 1.0


def evolve_noisy(gates: Sequence[GateOp], n_qubits: int,
                 calib: CalibrationData) -> DensityMatrix:
    rho = DensityMatrix(n_qubits)
    for gate in gates:
        apply_noisy_gate(rho, gate, calib)
    return rho


def noisy_ensemble_energy(h: PauliSum, circuit, prep, theta,
                          calib: CalibrationData,
                          sampler: Optional[ShotSampler] = None) -> float:
    """Noisy-gate evolution of prep + ansatz, then per-term shot estimates.

    Every non-identity Pauli term is sampled independently (no measurement
    grouping); the identity term contributes its coefficient exactly.
    """
    from .ansatz import AnsatzCircuit  # local import to avoid cycles

    n = prep.n_qubits
    rho = DensityMatrix(n)
    for gate in prep.program:
        apply_noisy_gate(rho, gate, calib)
    theta = np.asarray(theta, dtype=float)
    for rot in circuit.rotations:
        angle = 2.0 * theta[rot.parameter_index] * rot.coefficient
        if angle != 0.0:
            apply_noisy_gate(rho, GateOp("PAULI_ROT", string=rot.string,
                                         angle=angle), calib)
    total = 0.0
    for string, coeff in h.items():
        if string.is_identity:
            total += coeff.real
            continue
        exact_value = rho.expectation(PauliSum(n, {string.embed(n): 1.0}))
        total += coeff.real * (sampler.sample(exact_value)
                               if sampler is not None else exact_value)
    return total


def totally_mixed_energy(h: PauliSum) -> float:
    """Tr(H)/2^n: the identity coefficient, the noise-saturation reference."""
    return float(h.coefficient(PauliString(h.n_qubits)).real)


# ---------------------------------------------------------------------------
# SPSA.
# ---------------------------------------------------------------------------

@dataclass
class SpsaResult:
    theta_star: np.ndarray
    best_value: float
    trace: List[float]
    iterations_used: int


def spsa_optimize(objective: Callable[[np.ndarray], float],
                  theta0: Sequence[float], config, max_iterations: int,
                  seed: int = 0) -> SpsaResult:
    """Two-evaluation SPSA with gain schedules a_k = a/(k+1+A)^alpha and
    c_k = c/(k+1)^gamma, Rademacher perturbations, best-seen tracking.

    The trace records (y+ + y-)/2 per iteration; reproducibility is exact
    for a fixed seed.
    """
    theta = np.asarray(theta0, dtype=float).copy()
    rng = np.random.default_rng(seed)
    best_theta = theta.copy()
    best_value = math.inf
    trace: List[float] = []
    for k in range(max_iterations):
        a_k = config.a / (k + 1 + config.big_a) ** config.alpha
        c_k = config.c / (k + 1) ** config.gamma
        delta = rng.integers(0, 2, size=theta.size) * 2.0 - 1.0
        y_plus = objective(theta + c_k * delta)
        y_minus = objective(theta - c_k * delta)
        if not (np.isfinite(y_plus) and np.isfinite(y_minus)):
            raise FloatingPointError(f"objective diverged at iteration {k}")
        ghat = (y_plus - y_minus) / (2.0 * c_k) * delta
        theta = theta - a_k * ghat
        mid = 0.5 * (y_plus + y_minus)
        trace.append(mid)
        if mid < best_value:
            best_value = mid
            best_theta = theta.copy()
    return SpsaResult(best_theta, best_value, trace, len(trace))
