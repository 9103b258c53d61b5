"""Dense state-vector simulation.

Amplitude index z is little-endian: qubit q is bit q of z. Gate definitions::

    H      = [[1, 1], [1, -1]] / sqrt(2)
    RZ(t)  = diag(exp(-i t/2), exp(i t/2))
    RX(t)  = cos(t/2) I - i sin(t/2) X
    RZZ(t) = exp(-i t/2 Z⊗Z)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from qmqo.circuit import Gate, QaoaCircuit
from qmqo.problem import bits_to_str
from qmqo.qubo import MAX_DENSE_QUBITS, Qubo, qubo_eval

_SQRT_HALF = np.sqrt(0.5)


@dataclass
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n > MAX_DENSE_QUBITS:
            raise ValueError(f"{self.n} qubits exceed the dense cap of {MAX_DENSE_QUBITS}")
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (2**self.n,):
            raise ValueError(f"expected {2**self.n} amplitudes, got {self.amplitudes.shape}")

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        amps = np.zeros(2**n, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n, amps)

    @classmethod
    def basis(cls, bits) -> "StateVector":
        n = len(bits)
        amps = np.zeros(2**n, dtype=np.complex128)
        amps[sum(int(b) << i for i, b in enumerate(bits))] = 1.0
        return cls(n, amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amplitudes.copy())


@dataclass
class MeasurementRecord:
    shots: int
    histogram: dict[str, int] = field(default_factory=dict)

    def frequency(self, bitstring: str) -> float:
        return self.histogram.get(bitstring, 0) / self.shots if self.shots else 0.0


def uniform_superposition(n: int) -> StateVector:
    return StateVector(n, np.full(2**n, 2.0 ** (-n / 2), dtype=np.complex128))


@lru_cache(maxsize=512)
def _bit(n: int, q: int) -> np.ndarray:
    bits = (np.arange(2**n) >> q) & 1
    bits.setflags(write=False)
    return bits


@lru_cache(maxsize=4096)
def _z_sign(n: int, targets: tuple[int, ...]) -> np.ndarray:
    """Eigenvalue of Z (one target) or Z⊗Z (two targets) on every basis state."""
    odd = np.zeros(2**n, dtype=np.int64)
    for t in targets:
        odd ^= _bit(n, t)
    sign = 1.0 - 2.0 * odd
    sign.setflags(write=False)
    return sign


def _apply_1q(amps: np.ndarray, n: int, q: int, u: np.ndarray) -> np.ndarray:
    view = amps.reshape(2 ** (n - 1 - q), 2, 2**q)
    view[...] = np.matmul(u, view)
    return amps


def _check_targets(n: int, gate: Gate) -> None:
    for t in gate.targets:
        if not 0 <= t < n:
            raise IndexError(f"{gate.kind} target {t} out of range for {n} qubits")


def _matrix_1q(gate: Gate) -> np.ndarray:
    if gate.kind == "H":
        return np.array([[1, 1], [1, -1]]) * _SQRT_HALF
    c, s = np.cos(0.5 * gate.angle), np.sin(0.5 * gate.angle)
    return np.array([[c, -1j * s], [-1j * s, c]])


def apply_inplace(amps: np.ndarray, n: int, gate: Gate) -> np.ndarray:
    """Apply ``gate`` to an amplitude array, overwriting it."""
    _check_targets(n, gate)
    if gate.kind in ("RZ", "RZZ"):
        amps *= np.exp(-0.5j * gate.angle * _z_sign(n, gate.targets))
        return amps
    return _apply_1q(amps, n, gate.targets[0], _matrix_1q(gate))


def apply(state: StateVector, gate: Gate) -> StateVector:
    """Return a new state with ``gate`` applied."""
    return StateVector(state.n, apply_inplace(state.amplitudes.copy(), state.n, gate))


def run(circuit: QaoaCircuit) -> StateVector:
    """Apply every gate of ``circuit`` to ``|0...0>``.

    Runs of consecutive diagonal gates (RZ, RZZ) are merged into one phase
    multiplication; they commute, so the product is unchanged.
    """
    n = circuit.n
    amps = StateVector.zero(n).amplitudes
    phase = None
    for gate in circuit.gates:
        _check_targets(n, gate)
        if gate.kind in ("RZ", "RZZ"):
            term = (0.5 * gate.angle) * _z_sign(n, gate.targets)
            phase = term if phase is None else phase + term
            continue
        if phase is not None:
            amps *= np.exp(-1j * phase)
            phase = None
        _apply_1q(amps, n, gate.targets[0], _matrix_1q(gate))
    if phase is not None:
        amps *= np.exp(-1j * phase)
    return StateVector(n, amps)


def expectation(state: StateVector, qubo: Qubo) -> float:
    """Exact ``<psi| F_C |psi>``."""
    if qubo.n != state.n:
        raise ValueError(f"state has {state.n} qubits, QUBO has {qubo.n} variables")
    return float(state.probabilities() @ qubo.energies)


def index_to_bitstring(z: int, n: int) -> str:
    return bits_to_str([(z >> i) & 1 for i in range(n)])


def sample(state: StateVector, shots: int, seed=None) -> MeasurementRecord:
    """Measure ``shots`` times in the computational basis.

    Histogram keys are bitstrings in qubit order (qubit 0 first).
    """
    if shots < 0:
        raise ValueError("shots must be non-negative")
    probs = state.probabilities()
    probs = probs / probs.sum()
    counts = np.random.default_rng(seed).multinomial(shots, probs)
    hist = {index_to_bitstring(int(z), state.n): int(counts[z]) for z in np.flatnonzero(counts)}
    return MeasurementRecord(shots, hist)


def sampled_expectation(record: MeasurementRecord, qubo: Qubo) -> float:
    """Shot estimate of ``<F_C>`` from a histogram."""
    total = sum(qubo_eval(qubo, [int(ch) for ch in b]) * c for b, c in record.histogram.items())
    return total / record.shots
