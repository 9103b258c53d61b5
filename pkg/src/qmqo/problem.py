"""Multiple query optimization (MQO) instances.

An instance is a batch of queries, each with a list of candidate plans.
Plans carry a cost, and some pairs of plans belong to different queries and
share work: when both are selected the total cost drops by a saving.
A solution selects exactly one plan per query.

Plans are indexed globally from 0, row-major over the queries: with
``query_plan_counts = [2, 3]`` plans 0-1 belong to query 0 and plans 2-4 to
query 1. Bitstrings are lists of 0/1 in that plan order.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from itertools import accumulate
from pathlib import Path
from typing import IO, Sequence, Union

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_BRUTE_FORCE_CAP = 2**24
_CHUNK = 1 << 16


class ProblemError(ValueError):
    """Raised for malformed instances or problem files."""


@dataclass(frozen=True)
class Saving:
    i: int
    j: int
    value: float


@dataclass(frozen=True)
class MqoProblem:
    """An MQO instance.

    Parameters
    ----------
    query_plan_counts : sequence of int
        Number of plans per query.
    plan_costs : sequence of float
        Cost of every plan in global plan order.
    savings : sequence of Saving
        Cross-query savings with ``i < j``.
    epsilon : float
        Margin added to the largest plan cost when encoding (default 1).
    """

    query_plan_counts: tuple[int, ...]
    plan_costs: tuple[float, ...]
    savings: tuple[Saving, ...] = ()
    epsilon: float = 1.0
    _offsets: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "query_plan_counts", tuple(int(c) for c in self.query_plan_counts))
        object.__setattr__(self, "plan_costs", tuple(float(c) for c in self.plan_costs))
        object.__setattr__(
            self,
            "savings",
            tuple(s if isinstance(s, Saving) else Saving(*s) for s in self.savings),
        )
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "_offsets", (0,) + tuple(accumulate(self.query_plan_counts)))
        self._validate()

    def _validate(self) -> None:
        if not self.query_plan_counts:
            raise ProblemError("query_plan_counts: at least one query is required")
        if any(c < 1 for c in self.query_plan_counts):
            raise ProblemError("query_plan_counts: every query needs at least one plan")
        if len(self.plan_costs) != self.n_plans:
            raise ProblemError(
                f"plan_costs: expected {self.n_plans} costs, got {len(self.plan_costs)}"
            )
        if any(not c > 0 for c in self.plan_costs):
            raise ProblemError("plan_costs: costs must be positive")
        if not self.epsilon > 0:
            raise ProblemError("epsilon: must be positive")
        seen = set()
        for k, s in enumerate(self.savings):
            if not (0 <= s.i < s.j < self.n_plans):
                raise ProblemError(f"savings[{k}]: need 0 <= i < j < {self.n_plans}, got ({s.i}, {s.j})")
            if self.plan_query(s.i) == self.plan_query(s.j):
                raise ProblemError(f"savings[{k}]: plans {s.i} and {s.j} belong to the same query")
            if (s.i, s.j) in seen:
                raise ProblemError(f"savings[{k}]: duplicate pair ({s.i}, {s.j})")
            seen.add((s.i, s.j))
            if s.value > self.plan_costs[s.i] + self.plan_costs[s.j]:
                log.warning(
                    "saving (%d, %d) = %g exceeds the combined plan cost", s.i, s.j, s.value
                )

    @property
    def n_queries(self) -> int:
        return len(self.query_plan_counts)

    @property
    def n_plans(self) -> int:
        return sum(self.query_plan_counts)

    def query_plans(self, q: int) -> range:
        """Global plan indices of query ``q``."""
        return range(self._offsets[q], self._offsets[q + 1])

    def plan_query(self, plan_index: int) -> int:
        return plan_query(self, plan_index)


def plan_query(problem: MqoProblem, plan_index: int) -> int:
    """Return the query that owns ``plan_index``."""
    if not 0 <= plan_index < problem.n_plans:
        raise IndexError(f"plan index {plan_index} out of range [0, {problem.n_plans})")
    return int(np.searchsorted(problem._offsets, plan_index, side="right")) - 1


def _check_length(problem: MqoProblem, bits: Sequence[int]) -> None:
    if len(bits) != problem.n_plans:
        raise ValueError(f"solution has {len(bits)} bits, problem has {problem.n_plans} plans")


def is_admissible(problem: MqoProblem, bits: Sequence[int]) -> bool:
    """True iff exactly one plan is selected for every query."""
    _check_length(problem, bits)
    return all(
        sum(bits[k] for k in problem.query_plans(q)) == 1 for q in range(problem.n_queries)
    )


def solution_cost(problem: MqoProblem, bits: Sequence[int]) -> float:
    """Total cost of an admissible selection, net of savings."""
    if not is_admissible(problem, bits):
        raise ValueError("solution is not admissible: select exactly one plan per query")
    cost = sum(c for c, b in zip(problem.plan_costs, bits) if b)
    cost -= sum(s.value for s in problem.savings if bits[s.i] and bits[s.j])
    return cost


def enumeration_count(problem_or_counts) -> int:
    """Number of admissible solutions (product of plans per query)."""
    counts = getattr(problem_or_counts, "query_plan_counts", problem_or_counts)
    total = 1
    for c in counts:
        total *= int(c)
    return total


def _choices_to_bits(problem: MqoProblem, choices: Sequence[int]) -> list[int]:
    bits = [0] * problem.n_plans
    for q, c in enumerate(choices):
        bits[problem._offsets[q] + int(c)] = 1
    return bits


def brute_force(problem: MqoProblem, cap: int = DEFAULT_BRUTE_FORCE_CAP) -> tuple[list[int], float]:
    """Exhaustively search the admissible solutions.

    Only the ``prod(query_plan_counts)`` admissible selections are visited.
    Among equal-cost optima the lexicographically smallest bitstring wins.

    Returns
    -------
    bits, cost
    """
    total = enumeration_count(problem)
    if total > cap:
        raise ValueError(f"{total} admissible solutions exceed the brute-force cap of {cap}")

    counts = np.asarray(problem.query_plan_counts, dtype=np.int64)
    offsets = np.asarray(problem._offsets[:-1], dtype=np.int64)
    costs = np.asarray(problem.plan_costs)
    # Mixed radix, query 0 most significant.
    radix = np.ones(len(counts), dtype=np.int64)
    for q in range(len(counts) - 2, -1, -1):
        radix[q] = radix[q + 1] * counts[q + 1]
    owner = [problem.plan_query(s.i) for s in problem.savings]
    partner = [problem.plan_query(s.j) for s in problem.savings]

    best_cost, best_index = np.inf, -1
    for start in range(0, total, _CHUNK):
        flat = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (flat[:, None] // radix[None, :]) % counts[None, :]
        chunk = costs[digits + offsets[None, :]].sum(axis=1)
        for s, qi, qj in zip(problem.savings, owner, partner):
            hit = (digits[:, qi] == s.i - offsets[qi]) & (digits[:, qj] == s.j - offsets[qj])
            chunk = chunk - np.where(hit, s.value, 0.0)
        low = chunk.min()
        # Larger digit tuple means earlier zeros, i.e. a lexicographically smaller bitstring.
        index = int(flat[np.flatnonzero(chunk == low)[-1]])
        if low < best_cost or (low == best_cost and index > best_index):
            best_cost, best_index = float(low), index

    choices = (best_index // radix) % counts
    return _choices_to_bits(problem, choices), best_cost


@dataclass(frozen=True)
class GeneratorConfig:
    cost_low: int = 1
    cost_high: int = 50
    saving_density: float = 0.25
    epsilon: float = 1.0


def generate_random(
    n_queries: int, plans_per_query: int, seed: int, config: GeneratorConfig | None = None
) -> MqoProblem:
    """Draw a reproducible random instance.

    Costs are integers in ``[cost_low, cost_high]``. Each cross-query plan pair
    independently receives a saving with probability ``saving_density``; its
    value is an integer in ``[1, min(c_i, c_j)]``.
    """
    if n_queries < 1 or plans_per_query < 1:
        raise ValueError("need at least one query and one plan per query")
    config = config or GeneratorConfig()
    rng = np.random.default_rng(seed)
    n = n_queries * plans_per_query
    costs = rng.integers(config.cost_low, config.cost_high + 1, size=n)
    savings = []
    for i in range(n):
        for j in range(i + 1, n):
            if i // plans_per_query == j // plans_per_query:
                continue
            if rng.random() < config.saving_density:
                value = rng.integers(1, min(costs[i], costs[j]) + 1)
                savings.append(Saving(i, j, float(value)))
    return MqoProblem(
        (plans_per_query,) * n_queries,
        tuple(float(c) for c in costs),
        tuple(savings),
        config.epsilon,
    )


# --- file format ---------------------------------------------------------


def _number(x: float):
    return int(x) if float(x).is_integer() else float(x)


def to_dict(problem: MqoProblem) -> dict:
    queries = [[_number(problem.plan_costs[k]) for k in problem.query_plans(q)] for q in range(problem.n_queries)]
    return {
        "queries": queries,
        "savings": [{"i": s.i, "j": s.j, "value": _number(s.value)} for s in problem.savings],
        "epsilon": _number(problem.epsilon),
    }


def from_dict(data: dict) -> MqoProblem:
    if not isinstance(data, dict):
        raise ProblemError("top level: expected a JSON object")
    queries = data.get("queries")
    if not isinstance(queries, list) or not queries:
        raise ProblemError("queries: expected a non-empty list of plan-cost lists")
    costs = []
    for q, plans in enumerate(queries):
        if not isinstance(plans, list) or not plans:
            raise ProblemError(f"queries[{q}]: expected a non-empty list of costs")
        for k, c in enumerate(plans):
            if isinstance(c, bool) or not isinstance(c, (int, float)):
                raise ProblemError(f"queries[{q}][{k}]: expected a number, got {c!r}")
            costs.append(c)
    savings = []
    for k, s in enumerate(data.get("savings", [])):
        try:
            savings.append(Saving(int(s["i"]), int(s["j"]), float(s["value"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ProblemError(f"savings[{k}]: expected object with i, j, value ({exc})") from None
    eps = data.get("epsilon", 1)
    if isinstance(eps, bool) or not isinstance(eps, (int, float)):
        raise ProblemError(f"epsilon: expected a number, got {eps!r}")
    return MqoProblem(tuple(len(p) for p in queries), tuple(costs), tuple(savings), eps)


def dumps(problem: MqoProblem) -> str:
    return json.dumps(to_dict(problem), indent=2) + "\n"


def loads(text: str) -> MqoProblem:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_dict(data)


PathOrStream = Union[str, os.PathLike, IO[str]]


def load(source: PathOrStream) -> MqoProblem:
    if isinstance(source, (str, os.PathLike)):
        return loads(Path(source).read_text(encoding="utf-8"))
    return loads(source.read())


def save(problem: MqoProblem, target: PathOrStream) -> None:
    text = dumps(problem)
    if isinstance(target, (str, os.PathLike)):
        Path(target).write_text(text, encoding="utf-8")
    else:
        target.write(text)


def example_problem() -> MqoProblem:
    """Two queries with two plans each; plans 1 and 2 share a saving of 14."""
    return from_dict({"queries": [[3, 13], [21, 1]], "savings": [{"i": 1, "j": 2, "value": 14}], "epsilon": 1})


def bits_to_str(bits: Sequence[int]) -> str:
    """Render bits in plan order, plan 0 first."""
    return "".join(str(int(b)) for b in bits)


def str_to_bits(text: str) -> list[int]:
    if not text or set(text) - {"0", "1"}:
        raise ValueError(f"not a bitstring: {text!r}")
    return [int(ch) for ch in text]


def small_gap_instance(negative_savings: bool = True) -> MqoProblem:
    """Two queries, plan costs 8, 42 | 49, 3, savings on every cross pair.

    The savings are published as -15, -12, -5, -14; ``negative_savings=False``
    reads them as positive magnitudes instead.
    """
    sign = -1 if negative_savings else 1
    savings = [(0, 2, 15), (0, 3, 12), (1, 2, 5), (1, 3, 14)]
    return MqoProblem((2, 2), (8, 42, 49, 3), tuple(Saving(i, j, sign * v) for i, j, v in savings))
