import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from fracpp.errors import AccuracyError, DomainError
from fracpp.specfun import (
    SeriesResult,
    caputo_numeric,
    caputo_power,
    incomplete_beta,
    mittag_leffler,
    mittag_leffler_two_param,
    ml_array,
    recip_gamma,
)


def test_ml_zero_argument():
    assert mittag_leffler(0.7, 0.0).value == 1.0


def test_ml_beta_one_is_exponential():
    assert mittag_leffler(1.0, -1.0).value == pytest.approx(math.exp(-1.0), rel=1e-15)


def test_ml_half_against_erfc():
    # L_{1/2}(-x) = exp(x^2) erfc(x)
    assert mittag_leffler(0.5, -1.0).value == pytest.approx(math.e * special.erfc(1.0), rel=1e-13)


def test_two_param_reductions():
    assert mittag_leffler_two_param(1.0, 1.0, 1.0).value == pytest.approx(math.e, rel=1e-15)
    assert mittag_leffler_two_param(0.6, 1.0, -2.0).value == pytest.approx(mittag_leffler(0.6, -2.0).value, rel=1e-14)


def test_two_param_against_extended_precision_sum():
    with mpmath.workdps(50):
        ref = mpmath.fsum(mpmath.mpf(-1) ** k * mpmath.rgamma(mpmath.mpf(k) / 2 + mpmath.mpf(1) / 2) for k in range(60))
    assert mittag_leffler_two_param(0.5, 0.5, -1.0).value == pytest.approx(float(ref), rel=1e-13)


def test_series_result_fields():
    r = mittag_leffler(0.8, -3.0)
    assert isinstance(r, SeriesResult)
    assert r.terms_used >= 1
    assert r.trunc_error_bound >= 0
    with pytest.raises(ValueError):
        SeriesResult(1.0, 0, 0.0)
    with pytest.raises(ValueError):
        SeriesResult(1.0, 1, -1.0)


@pytest.mark.parametrize("beta", [0.0, 1.5, -0.2, math.nan])
def test_ml_rejects_bad_beta(beta):
    with pytest.raises(DomainError):
        mittag_leffler(beta, -1.0)


def test_ml_rejects_non_finite_argument():
    with pytest.raises(DomainError):
        mittag_leffler(0.5, math.inf)


def test_series_mode_reports_cancellation():
    with pytest.raises(AccuracyError) as info:
        mittag_leffler(0.5, -20.0, method="series")
    assert math.isfinite(info.value.value)


@pytest.mark.parametrize("beta", np.round(np.arange(0.1, 1.01, 0.1), 1))
def test_ml_bounded_and_monotone_on_negative_axis(beta):
    z = np.linspace(0.0, -30.0, 61)
    vals = np.array([mittag_leffler(beta, zi).value for zi in z])
    assert np.all(vals > 0.0) and np.all(vals <= 1.0)
    assert np.all(np.diff(vals) <= 1e-15)


@pytest.mark.parametrize("beta", [0.2, 0.5, 0.75, 1.0])
@pytest.mark.parametrize("z", [-0.5, -3.0, -8.0, 1.5])
def test_ml_equals_two_param_with_gamma_one(beta, z):
    assert mittag_leffler(beta, z).value == pytest.approx(mittag_leffler_two_param(beta, 1.0, z).value, abs=1e-12)


def test_ml_array_matches_scalar():
    z = np.array([0.0, -1.0, -5.0])
    np.testing.assert_allclose(ml_array(0.6, z), [mittag_leffler(0.6, v).value for v in z], rtol=0, atol=0)


def test_recip_gamma_examples():
    assert recip_gamma(1.0) == 1.0
    assert recip_gamma(0.0) == 0.0
    x = -1.5
    assert recip_gamma(x) == pytest.approx(math.gamma(1 - x) * math.sin(math.pi * x) / math.pi, rel=1e-14)
    assert recip_gamma(x) == pytest.approx(3 / (4 * math.sqrt(math.pi)), rel=1e-14)


def test_recip_gamma_identity_and_poles():
    for x in np.round(np.arange(0.1, 5.01, 0.1), 1):
        assert recip_gamma(x) * math.gamma(x) == pytest.approx(1.0, abs=1e-12)
    for k in range(11):
        assert recip_gamma(-k) == 0.0


def test_incomplete_beta_examples():
    assert incomplete_beta(1.0, 1.0, 0.3) == pytest.approx(0.3, rel=1e-14)
    assert incomplete_beta(0.5, 1.5, 1.0) == pytest.approx(math.pi / 2, rel=1e-12)
    ref, _ = integrate.quad(lambda u: u**-0.5 * (1 - u) ** 0.5, 0.0, 0.5, epsabs=1e-13, epsrel=1e-13)
    assert incomplete_beta(0.5, 1.5, 0.5) == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("a,b", [(0.5, 1.5), (2.0, 3.0), (0.3, 0.7), (1.0, 1.0)])
def test_incomplete_beta_complete_value(a, b):
    assert incomplete_beta(a, b, 1.0) == pytest.approx(math.gamma(a) * math.gamma(b) / math.gamma(a + b), abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(
    a=st.floats(0.1, 4.0),
    b=st.floats(0.1, 4.0),
    x1=st.floats(0.0, 1.0),
    x2=st.floats(0.0, 1.0),
)
def test_incomplete_beta_monotone(a, b, x1, x2):
    lo, hi = sorted((x1, x2))
    assert incomplete_beta(a, b, lo) <= incomplete_beta(a, b, hi) + 1e-15


@pytest.mark.parametrize("args", [(0.0, 1.0, 0.5), (1.0, -1.0, 0.5), (1.0, 1.0, 1.5), (1.0, 1.0, -0.1)])
def test_incomplete_beta_domain(args):
    with pytest.raises(DomainError):
        incomplete_beta(*args)


def test_caputo_power_examples():
    assert caputo_power(2.0, 1.0, 3.0) == pytest.approx(6.0, rel=1e-15)
    assert caputo_power(1.0, 0.5, 1.0) == pytest.approx(caputo_numeric(lambda u: u, 0.5, 1.0, 512), abs=1e-10)
    with pytest.raises(DomainError):
        caputo_power(0.0, 0.5, 1.0)


def test_caputo_power_sqrt_against_weighted_quadrature():
    # D^{1/2} sqrt(t) at t=1: (1/Gamma(1/2)) int_0^1 (1/2) s^{-1/2} (1-s)^{-1/2} ds,
    # integrated with an algebraic-endpoint weight
    val, _ = integrate.quad(lambda s: 0.5, 0.0, 1.0, weight="alg", wvar=(-0.5, -0.5))
    oracle = val / math.gamma(0.5)
    assert caputo_power(0.5, 0.5, 1.0) == pytest.approx(oracle, rel=1e-12)
    assert caputo_power(0.5, 0.5, 1.0) == pytest.approx(math.gamma(1.5), rel=1e-14)


def test_caputo_numeric_examples():
    assert caputo_numeric(lambda u: np.full_like(u, 5.0), 0.5, 2.0) == 0.0
    assert caputo_numeric(lambda u: u, 0.5, 1.0, n_grid=512) == pytest.approx(1 / math.gamma(1.5), abs=1e-4)
    assert caputo_numeric(lambda u: u**2, 1.0, 3.0) == pytest.approx(6.0, abs=1e-9)


def test_caputo_numeric_accepts_samples_and_checks_grid():
    u = np.linspace(0.0, 1.0, 257)
    assert caputo_numeric(u**2, 0.5, 1.0) == pytest.approx(caputo_numeric(lambda s: s**2, 0.5, 1.0, 256))
    with pytest.raises(DomainError):
        caputo_numeric(lambda s: s, 0.5, 1.0, n_grid=8)


@pytest.mark.parametrize("p", [0.5, 2.0])
def test_caputo_numeric_converges_faster_than_first_order(p):
    exact = caputo_power(p, 0.5, 1.0)
    errs = [abs(caputo_numeric(lambda u: u**p, 0.5, 1.0, n) - exact) for n in (64, 128, 256, 512)]
    rates = [math.log2(errs[i] / errs[i + 1]) for i in range(3)]
    assert min(rates) > 1.0


def test_caputo_numeric_exact_for_linear():
    # linear interpolation reproduces f(t) = t exactly
    for n in (64, 128, 256):
        assert caputo_numeric(lambda u: u, 0.5, 1.0, n) == pytest.approx(caputo_power(1.0, 0.5, 1.0), abs=1e-13)
