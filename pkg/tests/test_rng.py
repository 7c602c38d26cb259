import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from prefopt.errors import InvalidDimensionError
from prefopt.rng import derive_seed, make_stream, sample_gaussian, sample_unit_sphere, trial_streams


def test_same_seed_same_sequence():
    a = make_stream(7, 3, "perturbation").standard_normal(16)
    b = make_stream(7, 3, "perturbation").standard_normal(16)
    assert a.tobytes() == b.tobytes()


def test_frozen_first_draw():
    # pins the generator: a change here breaks reproducibility of stored traces
    u = sample_unit_sphere(make_stream(0, "pin"), 3)
    assert u.tolist() == [0.8373934329834615, -0.25858487539400793, -0.48156629929184036]
    assert derive_seed(0, "pin") == 925119144246098766
    assert derive_seed(0, "pin") != derive_seed(1, "pin")


def test_role_streams_are_distinct():
    s = trial_streams(11)
    draws = [g.standard_normal(4).tobytes() for g in s]
    assert len(set(draws)) == 3


@pytest.mark.parametrize("keys", [(0, "a"), (1, "a"), (0, "b")])
def test_keys_separate_streams(keys):
    base = make_stream(5, 0, "a").standard_normal(8)
    other = make_stream(5, *keys).standard_normal(8)
    assert (keys == (0, "a")) == np.array_equal(base, other)


def test_bad_keys_rejected():
    with pytest.raises(ValueError):
        make_stream(-1)
    with pytest.raises(TypeError):
        make_stream(0, 1.5)


@pytest.mark.parametrize("sampler", [sample_unit_sphere, sample_gaussian])
@pytest.mark.parametrize("d", [0, -2])
def test_invalid_dimension(sampler, d):
    with pytest.raises(InvalidDimensionError):
        sampler(make_stream(0), d)


def test_sphere_d1_is_plus_minus_one():
    u = sample_unit_sphere(make_stream(1), 1, size=100_000)
    assert set(np.unique(u)) == {-1.0, 1.0}
    assert abs(np.mean(u > 0) - 0.5) < 0.005


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32), d=st.integers(1, 50))
def test_sphere_unit_norm(seed, d):
    u = sample_unit_sphere(make_stream(seed), d)
    assert u.shape == (d,)
    assert abs(np.linalg.norm(u) - 1.0) <= 1e-12


def test_sphere_batch_unit_norm():
    u = sample_unit_sphere(make_stream(2), 7, size=1000)
    np.testing.assert_allclose(np.linalg.norm(u, axis=1), 1.0, atol=1e-12)


def test_hat_box_mean_abs_coordinate():
    # for d = 3 the first coordinate is uniform on [-1, 1], so E|u_1| = 1/2
    u = sample_unit_sphere(make_stream(3), 3, size=1_000_000)
    assert abs(np.mean(np.abs(u[:, 0])) - 0.5) < 0.002


@pytest.mark.parametrize("d", range(2, 11))
def test_sphere_marginal_ks(d):
    # <v, u> is distributed as 2 * Beta((d-1)/2, (d-1)/2) - 1 for any unit v
    rng = make_stream(4, d)
    v = sample_unit_sphere(make_stream(99, d), d)
    proj = sample_unit_sphere(rng, d, size=100_000) @ v
    a = (d - 1) / 2
    result = stats.kstest((proj + 1) / 2, stats.beta(a, a).cdf)
    assert result.pvalue > 1e-3


def test_sphere_second_moment_is_one():
    u = sample_unit_sphere(make_stream(5), 4, size=10_000)
    np.testing.assert_allclose(np.sum(u * u, axis=1).mean(), 1.0, rtol=1e-12)


def test_gaussian_moments():
    rng = make_stream(6)
    z2 = sample_gaussian(rng, 2, size=1_000_000)
    assert np.all(np.abs(z2.mean(axis=0)) < 0.004)
    z5 = sample_gaussian(rng, 5, size=1_000_000)
    assert abs(np.mean(np.sum(z5 * z5, axis=1)) - 5) < 0.05


def test_gaussian_deterministic():
    assert sample_gaussian(make_stream(8), 1)[0] == sample_gaussian(make_stream(8), 1)[0]
