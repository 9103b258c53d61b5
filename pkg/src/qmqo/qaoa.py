"""Hybrid QAOA loop for MQO.

The objective handed to the classical optimizer is the exact expectation
``<F_C>`` of the simulated circuit state. Two parameter strategies:

``random-init``
    all 2p angles drawn uniformly from ``[-pi/2, pi/2)`` and optimized jointly.
``fourier``
    optimize the Fourier amplitudes ``(u, v)``; depth grows 1, 2, ..., p and
    each new amplitude starts at 0, so only ``u_1, v_1`` are random.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from qmqo.circuit import build
from qmqo.optimizers import OPTIMIZERS, Tolerances
from qmqo.problem import MqoProblem
from qmqo.qubo import Qubo, admissible_mask, argmin_admissible_energy
from qmqo.simulator import StateVector, expectation, index_to_bitstring, run, sample, sampled_expectation

log = logging.getLogger(__name__)

STRATEGIES = ("fourier", "random-init")
HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class QaoaParams:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if len(self.gammas) != len(self.betas):
            raise ValueError("gammas and betas must have equal length")
        if not self.gammas:
            raise ValueError("depth p must be at least 1")

    @property
    def p(self) -> int:
        return len(self.gammas)

    def as_vector(self) -> np.ndarray:
        return np.array(self.gammas + self.betas)

    @classmethod
    def from_vector(cls, x) -> "QaoaParams":
        p = len(x) // 2
        return cls(tuple(x[:p]), tuple(x[p:]))


@dataclass(frozen=True)
class FourierParams:
    u: tuple[float, ...]
    v: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(float(a) for a in self.u))
        object.__setattr__(self, "v", tuple(float(b) for b in self.v))
        if len(self.u) != len(self.v):
            raise ValueError("u and v must have equal length")

    @property
    def p(self) -> int:
        return len(self.u)

    def as_vector(self) -> np.ndarray:
        return np.array(self.u + self.v)

    @classmethod
    def from_vector(cls, x) -> "FourierParams":
        p = len(x) // 2
        return cls(tuple(x[:p]), tuple(x[p:]))

    def extended(self) -> "FourierParams":
        """Append a zero amplitude to both series (depth p -> p + 1)."""
        return FourierParams(self.u + (0.0,), self.v + (0.0,))


def _fourier_matrices(p: int) -> tuple[np.ndarray, np.ndarray]:
    i = np.arange(1, p + 1)[:, None] - 0.5
    k = np.arange(1, p + 1)[None, :] - 0.5
    arg = k * i * math.pi / p
    return np.sin(arg), np.cos(arg)


def fourier_to_params(fp: FourierParams) -> QaoaParams:
    """``gamma_i = sum_k u_k sin((k-1/2)(i-1/2) pi/p)``, ``beta_i`` likewise with cos."""
    if fp.p < 1:
        raise ValueError("depth p must be at least 1")
    sin_m, cos_m = _fourier_matrices(fp.p)
    return QaoaParams(tuple(sin_m @ np.array(fp.u)), tuple(cos_m @ np.array(fp.v)))


def params_to_fourier(params: QaoaParams) -> FourierParams:
    sin_m, cos_m = _fourier_matrices(params.p)
    return FourierParams(
        tuple(np.linalg.solve(sin_m, params.gammas)), tuple(np.linalg.solve(cos_m, params.betas))
    )


def optimal_bitstrings(problem: MqoProblem, qubo: Qubo, rtol: float = 1e-12) -> np.ndarray:
    """Basis indices of every admissible bitstring with minimal QUBO energy."""
    _, z_min = argmin_admissible_energy(qubo, problem)
    energies = qubo.energies
    tie = np.abs(energies - z_min) <= rtol * max(1.0, abs(z_min))
    return np.flatnonzero(tie & admissible_mask(problem))


def success_probability(state: StateVector, problem: MqoProblem, qubo: Qubo) -> float:
    """Probability of measuring an optimal admissible bitstring."""
    return float(state.probabilities()[optimal_bitstrings(problem, qubo)].sum())


@dataclass
class QaoaResult:
    best_params: QaoaParams
    best_expectation: float
    approx_ratio: float
    argmax_bitstring: str
    success_probability: float
    evaluations: int
    z_min: float
    initial_approx_ratio: float
    trace: list[tuple[int, float]] = field(default_factory=list)
    probabilities: Optional[np.ndarray] = field(default=None, repr=False)


class _Objective:
    """Maps optimizer coordinates to ``<F_C>`` and remembers the best point."""

    def __init__(self, qubo: Qubo, to_params, shots: int = 0, rng=None):
        self.qubo = qubo
        self.to_params = to_params
        self.shots = shots
        self.rng = rng
        self.count = 0
        self.best_value = math.inf
        self.best_params: Optional[QaoaParams] = None

    def state(self, params: QaoaParams) -> StateVector:
        return run(build(self.qubo, params, "ising-exact"))

    def __call__(self, x) -> float:
        params = self.to_params(x)
        psi = self.state(params)
        if self.shots:
            value = sampled_expectation(sample(psi, self.shots, self.rng), self.qubo)
        else:
            value = expectation(psi, self.qubo)
        self.count += 1
        if value < self.best_value:
            self.best_value, self.best_params = value, params
        return value


def optimize(
    qubo: Qubo,
    problem: MqoProblem,
    p: int,
    optimizer: str = "powell",
    strategy: str = "fourier",
    seed: Optional[int] = None,
    budget: int = 10000,
    shots: int = 0,
    tolerances: Tolerances = Tolerances(),
    initial: Optional[QaoaParams] = None,
) -> QaoaResult:
    """Optimize the depth-p circuit for ``problem``.

    ``budget`` is the total number of circuit evaluations across all depths.
    ``initial`` replaces the random start: depth-p angles for ``random-init``,
    depth-1 angles for ``fourier``. ``shots > 0`` switches the objective to a
    sampled estimate.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if budget <= 0:
        raise ValueError("budget must be positive")
    if optimizer not in OPTIMIZERS:
        raise ValueError(f"unknown optimizer {optimizer!r}; expected one of {sorted(OPTIMIZERS)}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    minimize = OPTIMIZERS[optimizer]
    rng = np.random.default_rng(seed)
    shot_rng = np.random.default_rng(rng.integers(2**63)) if shots else None
    _, z_min = argmin_admissible_energy(qubo, problem)

    trace: list[tuple[int, float]] = []

    def record(it, x, fx):
        trace.append((len(trace) + 1, fx))

    if strategy == "random-init":
        objective = _Objective(qubo, QaoaParams.from_vector, shots, shot_rng)
        if initial is not None:
            if initial.p != p:
                raise ValueError(f"initial params have depth {initial.p}, expected {p}")
            x0 = initial.as_vector()
        else:
            x0 = rng.uniform(-HALF_PI, HALF_PI, size=2 * p)
        initial_value = objective(x0)
        remaining = budget - 1
        if remaining > 0:
            minimize(objective, x0, remaining, tolerances, record)
    else:
        objective = _Objective(qubo, lambda x: fourier_to_params(FourierParams.from_vector(x)), shots, shot_rng)
        if initial is not None:
            if initial.p != 1:
                raise ValueError("fourier strategy takes depth-1 initial params")
            fp = params_to_fourier(initial)
        else:
            u1, v1 = rng.uniform(-HALF_PI, HALF_PI, size=2)
            fp = FourierParams((u1,), (v1,))
        initial_value = objective(fp.as_vector())
        for depth in range(1, p + 1):
            remaining = budget - objective.count
            if remaining <= 0:
                break
            if depth > 1:
                fp = fp.extended()
            res = minimize(objective, fp.as_vector(), remaining, tolerances, record)
            fp = FourierParams.from_vector(res.x)

    best = pad_params(objective.best_params, p)
    psi = objective.state(best)
    best_value = expectation(psi, qubo)
    probs = psi.probabilities()
    return QaoaResult(
        best_params=best,
        best_expectation=best_value,
        approx_ratio=best_value / z_min,
        argmax_bitstring=index_to_bitstring(int(np.argmax(probs)), qubo.n),
        success_probability=success_probability(psi, problem, qubo),
        evaluations=objective.count,
        z_min=z_min,
        initial_approx_ratio=initial_value / z_min,
        trace=trace,
        probabilities=probs,
    )



def pad_params(params: QaoaParams, p: int) -> QaoaParams:
    """Extend to depth p with identity layers (gamma = beta = 0)."""
    k = p - params.p
    if k < 0:
        raise ValueError(f"cannot shrink depth {params.p} to {p}")
    return QaoaParams(params.gammas + (0.0,) * k, params.betas + (0.0,) * k)


def optimize_with_restarts(
    qubo: Qubo, problem: MqoProblem, p: int, restarts: int = 1, seed: Optional[int] = None, **kwargs
) -> QaoaResult:
    """Run ``optimize`` from ``restarts`` independent seeds and keep the lowest expectation.

    Child seeds come from ``SeedSequence(seed).spawn``, so the outcome does not
    depend on the order in which restarts are evaluated.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    children = np.random.SeedSequence(seed).spawn(restarts)
    results = [optimize(qubo, problem, p, seed=child, **kwargs) for child in children]
    best = min(results, key=lambda r: r.best_expectation)
    best.evaluations = sum(r.evaluations for r in results)
    return best
