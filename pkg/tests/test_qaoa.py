import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmqo.circuit import build
from qmqo.problem import MqoProblem, example_problem, generate_random
from qmqo.qaoa import (
    FourierParams,
    QaoaParams,
    fourier_to_params,
    optimal_bitstrings,
    optimize,
    optimize_with_restarts,
    pad_params,
    params_to_fourier,
    success_probability,
)
from qmqo.qubo import encode
from qmqo.simulator import StateVector, expectation, run, sample, uniform_superposition

finite = st.floats(-5.0, 5.0, allow_nan=False)


def fourier_oracle(u, v):
    p = len(u)
    gammas = [sum(u[k - 1] * math.sin((k - 0.5) * (i - 0.5) * math.pi / p) for k in range(1, p + 1)) for i in range(1, p + 1)]
    betas = [sum(v[k - 1] * math.cos((k - 0.5) * (i - 0.5) * math.pi / p) for k in range(1, p + 1)) for i in range(1, p + 1)]
    return gammas, betas


def test_params_validation():
    with pytest.raises(ValueError):
        QaoaParams((0.1,), (0.1, 0.2))
    with pytest.raises(ValueError):
        QaoaParams((), ())
    with pytest.raises(ValueError):
        FourierParams((0.1,), ())


def test_vector_round_trip():
    params = QaoaParams((0.1, 0.2), (0.3, 0.4))
    assert QaoaParams.from_vector(params.as_vector()) == params


def test_fourier_depth_one():
    out = fourier_to_params(FourierParams((0.8,), (-0.6,)))
    assert out.gammas[0] == pytest.approx(0.8 / math.sqrt(2))
    assert out.betas[0] == pytest.approx(-0.6 / math.sqrt(2))


def test_fourier_zero():
    out = fourier_to_params(FourierParams((0.0,) * 4, (0.0,) * 4))
    assert out.gammas == (0.0,) * 4 and out.betas == (0.0,) * 4


@settings(max_examples=50, deadline=None)
@given(data=st.data(), p=st.integers(1, 6))
def test_fourier_matches_oracle(data, p):
    u = data.draw(st.lists(finite, min_size=p, max_size=p))
    v = data.draw(st.lists(finite, min_size=p, max_size=p))
    gammas, betas = fourier_oracle(u, v)
    out = fourier_to_params(FourierParams(u, v))
    np.testing.assert_allclose(out.gammas, gammas, atol=1e-12)
    np.testing.assert_allclose(out.betas, betas, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(data=st.data(), p=st.integers(1, 6), scale=st.floats(-3, 3))
def test_fourier_linearity_and_inverse(data, p, scale):
    u = data.draw(st.lists(finite, min_size=p, max_size=p))
    v = data.draw(st.lists(finite, min_size=p, max_size=p))
    base = fourier_to_params(FourierParams(u, v))
    scaled = fourier_to_params(FourierParams([scale * a for a in u], [scale * b for b in v]))
    np.testing.assert_allclose(scaled.as_vector(), scale * base.as_vector(), atol=1e-9)
    back = params_to_fourier(base)
    np.testing.assert_allclose(back.as_vector(), u + v, atol=1e-9)


def test_extended_appends_zero():
    assert FourierParams((1.0,), (2.0,)).extended() == FourierParams((1.0, 0.0), (2.0, 0.0))


def test_pad_params():
    assert pad_params(QaoaParams((1.0,), (2.0,)), 3) == QaoaParams((1.0, 0.0, 0.0), (2.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        pad_params(QaoaParams((1.0, 1.0), (2.0, 2.0)), 1)


def test_success_probability_uniform(example2, example2_qubo):
    assert success_probability(uniform_superposition(4), example2, example2_qubo) == pytest.approx(1 / 16)


def test_success_probability_at_optimum(example2, example2_qubo):
    assert success_probability(StateVector.basis([1, 0, 0, 1]), example2, example2_qubo) == 1.0


def test_success_probability_sums_ties():
    problem = MqoProblem([2], [4, 4])
    qubo = encode(problem)
    assert len(optimal_bitstrings(problem, qubo)) == 2
    assert success_probability(uniform_superposition(2), problem, qubo) == pytest.approx(0.5)


def test_success_probability_matches_shot_frequency(example2, example2_qubo):
    psi = run(build(example2_qubo, [(0.2, 0.4), (-0.1, 0.3)]))
    exact = success_probability(psi, example2, example2_qubo)
    rec = sample(psi, 200_000, seed=3)
    assert rec.frequency("1001") == pytest.approx(exact, abs=0.005)


def test_budget_one_from_zero_angles(example2, example2_qubo):
    zero = QaoaParams((0.0,), (0.0,))
    for strategy in ("random-init", "fourier"):
        r = optimize(example2_qubo, example2, 1, strategy=strategy, budget=1, initial=zero)
        assert r.evaluations == 1
        assert r.success_probability == pytest.approx(1 / 16)
        np.testing.assert_allclose(r.probabilities, np.full(16, 1 / 16), atol=1e-12)


@pytest.mark.parametrize("strategy", ["fourier", "random-init"])
@pytest.mark.parametrize("optimizer", ["powell", "nelder-mead"])
def test_result_invariants(example2, example2_qubo, strategy, optimizer):
    r = optimize(example2_qubo, example2, 2, optimizer, strategy, seed=4, budget=600)
    assert r.evaluations <= 600
    assert r.z_min == -40
    assert r.approx_ratio == pytest.approx(r.best_expectation / r.z_min)
    assert r.approx_ratio >= r.initial_approx_ratio
    assert 0.0 <= r.success_probability <= 1.0
    assert r.best_params.p == 2
    # the objective is exactly the simulated expectation of the ising-exact circuit
    assert r.best_expectation == expectation(run(build(example2_qubo, r.best_params, "ising-exact")), example2_qubo)


def test_reproducible(example2, example2_qubo):
    a = optimize(example2_qubo, example2, 3, seed=11, budget=800)
    b = optimize(example2_qubo, example2, 3, seed=11, budget=800)
    assert a.best_params == b.best_params and a.trace == b.trace and a.evaluations == b.evaluations


def test_shots_mode_reproducible(example2, example2_qubo):
    a = optimize(example2_qubo, example2, 1, seed=2, budget=60, shots=256)
    b = optimize(example2_qubo, example2, 1, seed=2, budget=60, shots=256)
    assert a.best_params == b.best_params
    assert a.evaluations <= 60


def test_example2_endpoint_single_seed(example2, example2_qubo):
    r = optimize(example2_qubo, example2, 5, "powell", "fourier", seed=1)
    assert r.argmax_bitstring == "1001"


def test_restarts_keep_best(example2, example2_qubo):
    best = optimize_with_restarts(example2_qubo, example2, 1, restarts=3, seed=5, budget=200)
    children = np.random.SeedSequence(5).spawn(3)
    singles = [optimize(example2_qubo, example2, 1, seed=c, budget=200) for c in children]
    assert best.best_expectation == min(r.best_expectation for r in singles)
    assert best.evaluations == sum(r.evaluations for r in singles)


@pytest.mark.parametrize(
    "kwargs, match",
    [
        ({"budget": 0}, "budget"),
        ({"optimizer": "cobyla"}, "optimizer"),
        ({"strategy": "interp"}, "strategy"),
    ],
)
def test_optimize_errors(example2, example2_qubo, kwargs, match):
    with pytest.raises(ValueError, match=match):
        optimize(example2_qubo, example2, 1, **kwargs)


def test_optimize_bad_depth(example2, example2_qubo):
    with pytest.raises(ValueError):
        optimize(example2_qubo, example2, 0)
    with pytest.raises(ValueError):
        optimize_with_restarts(example2_qubo, example2, 1, restarts=0)


def test_initial_depth_checked(example2, example2_qubo):
    with pytest.raises(ValueError):
        optimize(example2_qubo, example2, 2, strategy="random-init", initial=QaoaParams((0.1,), (0.1,)))
    with pytest.raises(ValueError):
        optimize(example2_qubo, example2, 2, strategy="fourier", initial=QaoaParams((0.1, 0.1), (0.1, 0.1)))


@pytest.mark.parametrize("seed", range(3))
def test_ratio_at_most_one(seed):
    # With positive savings the global QUBO minimum is admissible, so <F_C> >= z_min.
    problem = generate_random(2, 3, seed=seed)
    qubo = encode(problem)
    assert qubo.energies.min() == pytest.approx(optimize(qubo, problem, 1, seed=0, budget=50).z_min)
    r = optimize(qubo, problem, 2, seed=seed, budget=1500)
    assert r.best_expectation >= r.z_min - 1e-9
    assert r.approx_ratio <= 1.0 + 1e-12
