import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import solve_discrete_are

from prefopt.errors import InvalidInputError, NumericError
from prefopt.lqg import (
    COST_CAP,
    LqgSystem,
    expected_cost,
    lqg_objective,
    perturbed_init,
    riccati_optimal_gain,
    rollout_cost,
)
from prefopt.rng import make_stream

from conftest import FixedStream

BENCH = LqgSystem(A=1.1, B=0.1, Q=1.0, R=1.0, gamma=0.7, noise_std=0.01, horizon=50, x0_state=1.0)
NOISELESS = dataclasses.replace(BENCH, noise_std=0.0)
KSTAR = -0.4030653271219043


def test_deadbeat_rollout():
    for gamma in (0.1, 0.7, 0.99):
        sys = dataclasses.replace(NOISELESS, gamma=gamma)
        assert rollout_cost(sys, -11.0, make_stream(0)) == pytest.approx(122.0, rel=1e-14)


def test_geometric_closed_form():
    # K = -5: A + BK = 0.6, cost = 26 * sum_{t=0}^{50} (0.7 * 0.36)^t
    assert rollout_cost(NOISELESS, -5.0, make_stream(0)) == pytest.approx(34.75935828877005, rel=1e-13)
    ratio = 0.7 * 0.36
    assert rollout_cost(NOISELESS, -5.0, make_stream(0)) == pytest.approx(26 * (1 - ratio**51) / (1 - ratio), rel=1e-13)


@pytest.mark.parametrize("K", [-11.0, -0.4, 0.0, 3.0])
def test_zero_initial_state_noiseless(K):
    sys = dataclasses.replace(NOISELESS, x0_state=0.0)
    assert rollout_cost(sys, K, make_stream(0)) == 0.0
    assert expected_cost(sys, K) == 0.0


@pytest.mark.parametrize("K", [-11.0, -5.0, KSTAR, 0.0, 2.0])
def test_expected_equals_noiseless_rollout(K):
    # same recursion, but (a x)^2 and a^2 x^2 round differently
    assert expected_cost(NOISELESS, K) == pytest.approx(rollout_cost(NOISELESS, K, make_stream(0)), rel=1e-13)


def test_deadbeat_expected_cost_with_noise():
    # m_0 = 1, m_t = sigma^2 for t >= 1 when A + BK = 0
    by_formula = 122 * (1 + 0.01**2 * sum(0.7**t for t in range(1, 51)))
    assert by_formula == pytest.approx(122.0284666661547, rel=1e-15)
    assert expected_cost(BENCH, -11.0) == pytest.approx(by_formula, rel=1e-12)


@pytest.mark.parametrize("K", [-2.0, 0.0])
def test_monte_carlo_matches_expected_cost(K):
    rng = make_stream(30, str(K))
    samples = np.array([rollout_cost(BENCH, K, rng) for _ in range(20_000)])
    se = samples.std(ddof=1) / math.sqrt(len(samples))
    assert abs(samples.mean() - expected_cost(BENCH, K)) < 3 * se


def test_vectorized_expected_cost_matches_scalar():
    ks = np.linspace(-15, 3, 37)
    np.testing.assert_allclose(expected_cost(BENCH, ks), [expected_cost(BENCH, k) for k in ks], rtol=1e-13)


def test_riccati_matches_scipy_dare():
    g = BENCH.gamma
    a, b = math.sqrt(g) * BENCH.A, math.sqrt(g) * BENCH.B
    P = solve_discrete_are(np.array([[a]]), np.array([[b]]), np.array([[BENCH.Q]]), np.array([[BENCH.R]]))[0, 0]
    k_dare = -g * BENCH.A * BENCH.B * P / (BENCH.R + g * BENCH.B**2 * P)
    assert riccati_optimal_gain(BENCH) == pytest.approx(k_dare, abs=1e-10)
    assert riccati_optimal_gain(BENCH) == pytest.approx(KSTAR, abs=1e-12)


def test_riccati_limits():
    assert abs(riccati_optimal_gain(dataclasses.replace(BENCH, gamma=1e-12))) < 1e-10
    assert riccati_optimal_gain(dataclasses.replace(BENCH, A=0.0)) == 0.0


def test_riccati_nonconvergence():
    with pytest.raises(NumericError):
        riccati_optimal_gain(BENCH, max_iter=2)


def test_kstar_minimizes_on_dense_grid():
    ks = np.arange(-3.0, 2.0, 1e-3)
    costs = expected_cost(BENCH, ks)
    assert abs(ks[np.argmin(costs)] - KSTAR) < 1e-3
    assert np.all(costs >= expected_cost(BENCH, KSTAR) - 1e-9)


def test_finite_difference_gradient_vanishes_at_kstar():
    obj = lqg_objective(BENCH)
    assert abs(obj.expected_gradient(np.array([KSTAR]))[0]) < 1e-3
    assert obj.dimension == 1
    assert obj.evaluate(np.array([-11.0]), make_stream(0)) == pytest.approx(122.0, abs=0.5)
    assert lqg_objective(NOISELESS).evaluate(np.array([-11.0]), make_stream(0)) == pytest.approx(122.0, rel=1e-14)


def test_finite_difference_richardson_self_check():
    # central differences: D(h) - D(h/2) shrinks by ~4 when h halves
    f = lambda k: expected_cost(BENCH, k)  # noqa: E731
    k = KSTAR + 0.37
    D = lambda h: (f(k + h) - f(k - h)) / (2 * h)  # noqa: E731
    h = 1e-2
    e1 = abs(D(h) - D(h / 2))
    e2 = abs(D(h / 2) - D(h / 4))
    assert 4 / 10 <= e1 / e2 <= 4 * 10
    obj = lqg_objective(BENCH)
    assert obj.expected_gradient(np.array([k]))[0] == pytest.approx(D(h / 4), abs=10 * e2)


def test_perturbed_init_boundaries():
    assert perturbed_init(KSTAR, FixedStream(uniforms=[0.0])) == KSTAR
    assert perturbed_init(KSTAR, FixedStream(uniforms=[1.0])) == KSTAR + 1


def test_perturbed_init_mean():
    rng = make_stream(31)
    draws = np.array([perturbed_init(KSTAR, rng) for _ in range(100_000)])
    assert abs(draws.mean() - (KSTAR + 0.5)) < 0.003
    assert draws.min() >= KSTAR and draws.max() <= KSTAR + 1


@settings(max_examples=50, deadline=None)
@given(K=st.floats(-100, 100), seed=st.integers(0, 2**31), sigma=st.floats(0, 1))
def test_rollout_nonnegative_and_capped(K, seed, sigma):
    cost = rollout_cost(dataclasses.replace(BENCH, noise_std=sigma), K, make_stream(seed))
    assert 0.0 <= cost <= COST_CAP


def test_unstable_rollout_hits_cap():
    assert rollout_cost(BENCH, 500.0, make_stream(0)) == COST_CAP


@pytest.mark.parametrize(
    "kwargs", [{"Q": 0.0}, {"R": -1.0}, {"gamma": 1.0}, {"gamma": 0.0}, {"noise_std": -0.1}, {"horizon": 0}]
)
def test_invalid_system(kwargs):
    with pytest.raises(InvalidInputError):
        LqgSystem(**kwargs)
