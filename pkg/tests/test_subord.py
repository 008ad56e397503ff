import math

import numpy as np
import pytest
from scipy import stats

from fracpp.analysis import ks_two_sample
from fracpp.errors import DomainError
from fracpp.process import MonteCarloEstimate
from fracpp.subord import (
    RngStream,
    inverse_stable_at,
    sample_inverse_stable_marginal,
    sample_inverse_stable_path,
    sample_stable,
    sample_stable_path,
)


def test_stable_alpha_one_is_deterministic(stream):
    assert sample_stable(1.0, 4.2, stream()) == 4.2


@pytest.mark.parametrize("alpha", [0.0, 1.2])
def test_stable_domain(alpha, stream):
    with pytest.raises(DomainError):
        sample_stable(alpha, 1.0, stream())


def test_stable_laplace_example(stream):
    d = sample_stable(0.7, 1.0, stream(1), size=10**6)
    est = MonteCarloEstimate.from_samples(np.exp(-0.5 * d))
    assert abs(est.zscore(math.exp(-(0.5**0.7)))) < 3


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7, 0.9])
def test_stable_laplace_transform(alpha, stream):
    d = sample_stable(alpha, 1.0, stream(int(alpha * 10)), size=10**6)
    for s in (0.25, 1.0, 4.0):
        est = MonteCarloEstimate.from_samples(np.exp(-s * d))
        assert abs(est.zscore(math.exp(-(s**alpha)))) < 4


@pytest.mark.parametrize("alpha,c", [(0.5, 2.0), (0.8, 10.0)])
def test_stable_self_similarity(alpha, c, stream):
    a = sample_stable(alpha, c, stream(2), size=10**5)
    b = c ** (1 / alpha) * sample_stable(alpha, 1.0, stream(3), size=10**5)
    assert not ks_two_sample(a, b).reject_at_1pct


def test_determinism():
    a = sample_stable(0.6, 1.0, RngStream(7, 3), size=1000)
    b = sample_stable(0.6, 1.0, RngStream(7, 3), size=1000)
    c = sample_stable(0.6, 1.0, RngStream(7, 4), size=1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_stable_path_alpha_one(stream):
    grid = np.linspace(0.0, 3.0, 7)
    p = sample_stable_path(1.0, grid, stream())
    assert np.array_equal(p.values, grid)


def test_stable_path_rejects_bad_grid(stream):
    with pytest.raises(DomainError):
        sample_stable_path(0.5, [0.0, 2.0, 1.0], stream())
    with pytest.raises(DomainError):
        sample_stable_path(0.5, [0.5, 1.0], stream())


def test_stable_path_increasing(stream):
    p = sample_stable_path(0.6, np.linspace(0.0, 5.0, 200), stream(4))
    assert p.values[0] == 0.0
    assert np.all(np.diff(p.values) > 0)


def test_stable_path_increments_exchangeable(stream):
    rows = np.array([np.diff(sample_stable_path(0.6, [0.0, 1.0, 2.0], RngStream(11, k)).values) for k in range(10**4)])
    res = stats.mannwhitneyu(rows[:, 0], rows[:, 1])
    assert res.pvalue > 0.01


def test_single_window_path_matches_marginal(stream):
    ends = np.array([sample_stable_path(0.7, [0.0, 1.5], RngStream(12, k)).values[-1] for k in range(10**4)])
    direct = sample_stable(0.7, 1.5, stream(13), size=10**5)
    assert not ks_two_sample(ends, direct).reject_at_1pct


def test_inverse_marginal_examples(stream):
    assert sample_inverse_stable_marginal(1.0, 3.0, stream()) == 3.0
    e = sample_inverse_stable_marginal(0.5, 1.0, stream(5), size=10**6)
    est = MonteCarloEstimate.from_samples(e)
    assert abs(est.zscore(1.0 / math.gamma(1.5))) < 3


@pytest.mark.parametrize("beta,c", [(0.6, 2.0), (0.5, 10.0), (0.8, 2.0)])
def test_inverse_self_similarity(beta, c, stream):
    a = sample_inverse_stable_marginal(beta, c, stream(6), size=10**5)
    b = c**beta * sample_inverse_stable_marginal(beta, 1.0, stream(7), size=10**5)
    assert not ks_two_sample(a, b).reject_at_1pct


def test_inverse_path_beta_one(stream):
    grid = np.linspace(0.0, 2.0, 5)
    assert np.array_equal(sample_inverse_stable_path(1.0, grid, rng=stream()).values, grid)


def test_inverse_path_rejects_bad_step(stream):
    with pytest.raises(DomainError):
        sample_inverse_stable_path(0.5, [0.0, 1.0], step=0.0, rng=stream())


def test_inverse_paths_nondecreasing(stream):
    for k in range(20):
        p = sample_inverse_stable_path(0.6, np.linspace(0.0, 5.0, 51), rng=stream(100 + k))
        assert p.values[0] == 0.0
        assert np.all(np.diff(p.values) >= 0)


def test_inverse_path_marginal_matches_exact_sampler(stream):
    e_path = inverse_stable_at(0.6, [1.0], 10**4, stream(8), step=1e-3)[:, 0]
    e_exact = sample_inverse_stable_marginal(0.6, 1.0, stream(9), size=10**5)
    assert not ks_two_sample(e_path, e_exact).reject_at_1pct


def test_inverse_path_threads_do_not_change_result():
    a = inverse_stable_at(0.5, [0.5, 1.0], 3000, RngStream(5), chunk=1000, threads=1)
    b = inverse_stable_at(0.5, [0.5, 1.0], 3000, RngStream(5), chunk=1000, threads=3)
    assert np.array_equal(a, b)


def test_inverse_path_continuity():
    # jumps of E shrink with the grid: max increment over a fine real-time grid is small
    grid = np.linspace(0.0, 1.0, 1001)
    p = sample_inverse_stable_path(0.7, grid, step=1e-4, rng=RngStream(3))
    assert np.max(np.diff(p.values)) < 0.2 * p.values[-1] + 1e-3
