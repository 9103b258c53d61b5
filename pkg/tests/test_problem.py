import io
import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmqo import problem as mqo
from qmqo.problem import (
    MqoProblem,
    ProblemError,
    Saving,
    brute_force,
    enumeration_count,
    generate_random,
    is_admissible,
    plan_query,
    solution_cost,
)

from conftest import EXAMPLE2_JSON


def naive_cost(problem, bits):
    total = 0.0
    for i in range(problem.n_plans):
        if bits[i]:
            total += problem.plan_costs[i]
    for s in problem.savings:
        if bits[s.i] == 1 and bits[s.j] == 1:
            total -= s.value
    return total


def all_bitstrings(n):
    return [list(b) for b in itertools.product([0, 1], repeat=n)]


@pytest.mark.parametrize(
    "counts, plan, query",
    [([2, 2], 3, 1), ([2, 2], 0, 0), ([3, 1, 2], 4, 2), ([3, 1, 2], 3, 1), ([3, 1, 2], 2, 0)],
)
def test_plan_query(counts, plan, query):
    problem = MqoProblem(counts, [1.0] * sum(counts))
    assert plan_query(problem, plan) == query


def test_plan_query_out_of_range():
    problem = MqoProblem([2, 2], [1, 1, 1, 1])
    with pytest.raises(IndexError):
        plan_query(problem, 4)
    with pytest.raises(IndexError):
        plan_query(problem, -1)


def test_admissibility_example2(example2):
    assert is_admissible(example2, [1, 0, 0, 1])
    assert not is_admissible(example2, [1, 0, 1, 1])
    assert not is_admissible(example2, [0, 0, 0, 0])
    with pytest.raises(ValueError):
        is_admissible(example2, [1, 0, 1])


def test_example2_costs_table(example2):
    # All four admissible selections listed for the worked example.
    assert solution_cost(example2, [0, 1, 0, 1]) == 14
    assert solution_cost(example2, [0, 1, 1, 0]) == 20
    assert solution_cost(example2, [1, 0, 0, 1]) == 4
    assert solution_cost(example2, [1, 0, 1, 0]) == 24


def test_solution_cost_rejects_non_admissible(example2):
    with pytest.raises(ValueError):
        solution_cost(example2, [1, 1, 0, 1])


def test_single_plan_cost():
    assert solution_cost(MqoProblem([1], [7]), [1]) == 7


def test_brute_force_example2(example2):
    assert brute_force(example2) == ([1, 0, 0, 1], 4)


def test_brute_force_single_query():
    assert brute_force(MqoProblem([3], [5, 2, 9])) == ([0, 1, 0], 2)


def test_brute_force_cap(example2):
    with pytest.raises(ValueError, match="cap"):
        brute_force(example2, cap=3)


def test_brute_force_tie_break_lexicographic():
    # Both plans cost 4: [0, 1] < [1, 0] lexicographically.
    assert brute_force(MqoProblem([2], [4, 4]))[0] == [0, 1]
    problem = MqoProblem([2, 2], [1, 1, 1, 1])
    assert brute_force(problem)[0] == [0, 1, 0, 1]


def test_brute_force_chunked_matches_full_scan(monkeypatch):
    problem = generate_random(3, 3, seed=5)
    expected = brute_force(problem)
    monkeypatch.setattr(mqo, "_CHUNK", 4)
    assert brute_force(problem) == expected


def full_scan_optimum(problem):
    best = None
    for bits in all_bitstrings(problem.n_plans):
        if not is_admissible(problem, bits):
            continue
        key = (naive_cost(problem, bits), bits)
        if best is None or key < best:
            best = key
    return best[1], best[0]


@pytest.mark.parametrize("seed", range(5))
def test_brute_force_random_3x3_matches_scan(seed):
    problem = generate_random(3, 3, seed=seed)
    assert brute_force(problem) == full_scan_optimum(problem)


@pytest.mark.parametrize("counts", [[2, 2], [3, 1, 2], [2, 3, 2], [4, 4], [1, 5, 2]])
def test_enumeration_count_matches_admissible_bitstrings(counts):
    problem = MqoProblem(counts, [1.0] * sum(counts))
    admissible = sum(is_admissible(problem, b) for b in all_bitstrings(problem.n_plans))
    assert enumeration_count(problem) == admissible


def test_enumeration_count_table_values():
    assert enumeration_count([2, 2]) == 4
    assert enumeration_count([10] * 10) == 10**10
    assert enumeration_count([1]) == 1


def test_generate_deterministic():
    assert generate_random(2, 2, 42) == generate_random(2, 2, 42)
    assert mqo.dumps(generate_random(3, 3, 9)) == mqo.dumps(generate_random(3, 3, 9))


@pytest.mark.parametrize("seed", range(20))
def test_generate_invariants(seed):
    problem = generate_random(3, 2, seed)
    assert problem.n_plans == 6
    for s in problem.savings:
        assert plan_query(problem, s.i) != plan_query(problem, s.j)
        assert 1 <= s.value <= min(problem.plan_costs[s.i], problem.plan_costs[s.j])
    assert all(1 <= c <= 50 and float(c).is_integer() for c in problem.plan_costs)


def test_generate_density_extremes():
    none = generate_random(3, 3, 1, mqo.GeneratorConfig(saving_density=0.0))
    full = generate_random(3, 3, 1, mqo.GeneratorConfig(saving_density=1.0))
    assert none.savings == ()
    assert len(full.savings) == 27  # 3 query pairs x 3 x 3 plan pairs


@settings(max_examples=60, deadline=None)
@given(
    counts=st.lists(st.integers(1, 3), min_size=1, max_size=4),
    seed=st.integers(0, 2**32 - 1),
)
def test_solution_cost_matches_naive(counts, seed):
    rng = np.random.default_rng(seed)
    n = sum(counts)
    costs = rng.integers(1, 30, size=n)
    offsets = np.cumsum([0] + counts)
    query = np.searchsorted(offsets, np.arange(n), side="right") - 1
    savings = [
        Saving(i, j, float(rng.integers(1, 10)))
        for i in range(n)
        for j in range(i + 1, n)
        if query[i] != query[j] and rng.random() < 0.4
    ]
    problem = MqoProblem(counts, costs, savings)
    choice = [int(rng.integers(c)) for c in counts]
    bits = [0] * n
    for q, c in enumerate(choice):
        bits[offsets[q] + c] = 1
    assert solution_cost(problem, bits) == pytest.approx(naive_cost(problem, bits))
    best_bits, best_cost = brute_force(problem)
    assert is_admissible(problem, best_bits)
    assert best_cost <= solution_cost(problem, bits) + 1e-9


# --- validation and file format ------------------------------------------


def test_invariants_rejected():
    with pytest.raises(ProblemError, match="same query"):
        MqoProblem([2, 2], [1, 2, 3, 4], [Saving(0, 1, 1)])
    with pytest.raises(ProblemError, match="duplicate"):
        MqoProblem([2, 2], [1, 2, 3, 4], [Saving(0, 2, 1), Saving(0, 2, 2)])
    with pytest.raises(ProblemError, match="i < j"):
        MqoProblem([2, 2], [1, 2, 3, 4], [Saving(2, 0, 1)])
    with pytest.raises(ProblemError, match="plan_costs"):
        MqoProblem([2, 2], [1, 2, 3])
    with pytest.raises(ProblemError, match="plan_costs"):
        MqoProblem([2], [1, -2])
    with pytest.raises(ProblemError, match="epsilon"):
        MqoProblem([1], [1], epsilon=0)


def test_large_saving_warns(caplog):
    with caplog.at_level("WARNING"):
        MqoProblem([1, 1], [1, 1], [Saving(0, 1, 5)])
    assert "exceeds" in caplog.text


def test_example_file_encodes_example2(example2):
    assert mqo.loads(EXAMPLE2_JSON) == example2


def test_round_trip_path(tmp_path):
    problem = generate_random(3, 2, seed=3)
    path = tmp_path / "p.json"
    mqo.save(problem, path)
    assert mqo.load(path) == problem


def test_round_trip_stream():
    problem = generate_random(2, 3, seed=11)
    buf = io.StringIO()
    mqo.save(problem, buf)
    buf.seek(0)
    assert mqo.load(buf) == problem


def test_round_trip_fractional_values():
    problem = MqoProblem([2, 1], [1.5, 2.0, 3.25], [Saving(0, 2, 0.5)], epsilon=0.1)
    assert mqo.loads(mqo.dumps(problem)) == problem


def test_parse_error_has_position():
    with pytest.raises(ProblemError, match=r"line 2, column"):
        mqo.loads('{"queries": [[1, 2]],\n "savings": [}')


@pytest.mark.parametrize(
    "payload, field",
    [
        ({"queries": []}, "queries"),
        ({"queries": [[1, "x"]]}, r"queries\[0\]\[1\]"),
        ({"queries": [[1], []]}, r"queries\[1\]"),
        ({"queries": [[1], [2]], "savings": [{"i": 0}]}, r"savings\[0\]"),
        ({"queries": [[1], [2]], "epsilon": "big"}, "epsilon"),
        ({"queries": [[1, 2]], "savings": [{"i": 0, "j": 1, "value": 1}]}, r"savings\[0\]"),
    ],
)
def test_field_errors_named(payload, field):
    with pytest.raises(ProblemError, match=field):
        mqo.loads(json.dumps(payload))


def test_bitstring_helpers():
    assert mqo.bits_to_str([1, 0, 0, 1]) == "1001"
    assert mqo.str_to_bits("0110") == [0, 1, 1, 0]
    with pytest.raises(ValueError):
        mqo.str_to_bits("01a")
