"""QUBO encoding of MQO instances.

The cost function is the sum of three parts over binary plan variables b:

* a linear term ``(c_i - w_min) * b_i`` per plan, which rewards selecting a plan,
* ``-s_ij * b_i * b_j`` per saving,
* ``w_max * b_k * b_j`` per pair of plans of the same query, which penalises
  selecting more than one plan for a query.

``w_min = max(c) + epsilon`` and ``w_max = w_min + sum(savings)``.

Spin convention for the Ising form: ``z_i = 1 - 2 b_i`` (bit 1 is spin -1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Sequence

import numpy as np

from qmqo.problem import MqoProblem, brute_force, is_admissible

MAX_DENSE_QUBITS = 24


@dataclass(frozen=True)
class Qubo:
    """Quadratic binary cost function over ``n`` plan variables.

    ``quadratic`` keeps insertion order: saving terms first, in problem order,
    then the same-query penalty terms query by query. Circuit construction
    relies on that order.
    """

    n: int
    linear: np.ndarray
    quadratic: dict[tuple[int, int], float]
    w_min: float = 0.0
    w_max: float = 0.0
    saving_pairs: frozenset = field(default=frozenset(), repr=False)

    def __post_init__(self):
        lin = np.asarray(self.linear, dtype=float)
        if lin.shape != (self.n,):
            raise ValueError(f"linear has shape {lin.shape}, expected ({self.n},)")
        lin.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        for i, j in self.quadratic:
            if not 0 <= i < j < self.n:
                raise ValueError(f"quadratic key ({i}, {j}) must satisfy 0 <= i < j < {self.n}")

    def __call__(self, bits: Sequence[int]) -> float:
        return qubo_eval(self, bits)

    @cached_property
    def energies(self) -> np.ndarray:
        """F_C over all basis states, index z little-endian (bit i = plan i)."""
        return DiagonalHamiltonian(self).vector()


def encode(problem: MqoProblem) -> Qubo:
    n = problem.n_plans
    w_min = max(problem.plan_costs) + problem.epsilon
    w_max = w_min + sum(s.value for s in problem.savings)
    linear = np.asarray(problem.plan_costs) - w_min
    quadratic: dict[tuple[int, int], float] = {}
    for s in problem.savings:
        quadratic[(s.i, s.j)] = quadratic.get((s.i, s.j), 0.0) - s.value
    for q in range(problem.n_queries):
        for k, j in combinations(problem.query_plans(q), 2):
            quadratic[(k, j)] = quadratic.get((k, j), 0.0) + w_max
    return Qubo(
        n,
        linear,
        quadratic,
        w_min=w_min,
        w_max=w_max,
        saving_pairs=frozenset((s.i, s.j) for s in problem.savings),
    )


def qubo_eval(qubo: Qubo, bits: Sequence[int]) -> float:
    if len(bits) != qubo.n:
        raise ValueError(f"got {len(bits)} bits for a {qubo.n}-variable QUBO")
    value = float(sum(qubo.linear[i] for i in range(qubo.n) if bits[i]))
    for (i, j), q in qubo.quadratic.items():
        if bits[i] and bits[j]:
            value += q
    return value


@dataclass(frozen=True)
class Ising:
    h: np.ndarray
    J: dict[tuple[int, int], float]
    offset: float

    def energy(self, spins: Sequence[int]) -> float:
        e = self.offset + float(np.dot(self.h, spins))
        for (i, j), c in self.J.items():
            e += c * spins[i] * spins[j]
        return e


def to_ising(qubo: Qubo) -> Ising:
    """Substitute ``b = (1 - z) / 2``.

    For every bitstring b with spins ``z = 1 - 2b``,
    ``offset + h.z + sum J_ij z_i z_j == qubo_eval(b)``.
    """
    h = -0.5 * qubo.linear.copy()
    offset = 0.5 * float(qubo.linear.sum())
    J = {}
    for (i, j), q in qubo.quadratic.items():
        J[(i, j)] = 0.25 * q
        h[i] -= 0.25 * q
        h[j] -= 0.25 * q
        offset += 0.25 * q
    return Ising(h, J, offset)


def bit_table(n: int) -> np.ndarray:
    """``(2**n, n)`` array with row z holding the little-endian bits of z."""
    z = np.arange(2**n, dtype=np.int64)
    return ((z[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int8)


class DiagonalHamiltonian:
    """The cost Hamiltonian, diagonal in the computational basis.

    Entry z equals ``qubo_eval`` of the little-endian bits of z.
    """

    def __init__(self, qubo: Qubo):
        self.qubo = qubo
        self.n = qubo.n

    def energy(self, z: int) -> float:
        return qubo_eval(self.qubo, [(z >> i) & 1 for i in range(self.n)])

    def vector(self) -> np.ndarray:
        if self.n > MAX_DENSE_QUBITS:
            raise ValueError(f"{self.n} qubits exceed the dense cap of {MAX_DENSE_QUBITS}")
        bits = bit_table(self.n).astype(float)
        e = bits @ self.qubo.linear
        for (i, j), q in self.qubo.quadratic.items():
            e += q * bits[:, i] * bits[:, j]
        e.setflags(write=False)
        return e


def admissible_mask(problem: MqoProblem) -> np.ndarray:
    """Boolean vector over basis states marking admissible bitstrings."""
    bits = bit_table(problem.n_plans)
    ok = np.ones(len(bits), dtype=bool)
    for q in range(problem.n_queries):
        plans = list(problem.query_plans(q))
        ok &= bits[:, plans].sum(axis=1) == 1
    return ok


def argmin_admissible_energy(qubo: Qubo, problem: MqoProblem) -> tuple[list[int], float]:
    """Lowest QUBO energy among admissible bitstrings.

    Over admissible solutions the QUBO equals ``solution_cost - Q * w_min``,
    so the brute-force optimum of the original problem is also the QUBO optimum.
    """
    bits, _ = brute_force(problem)
    assert is_admissible(problem, bits)
    return bits, qubo_eval(qubo, bits)
