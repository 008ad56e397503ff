import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracpp.errors import DomainError
from fracpp.rates import (
    Constant,
    CustomTable,
    GompertzMakeham,
    MusaOkumoto,
    Weibull,
    check_consistency,
    cumulative,
    intensity,
    inverse_cumulative,
    load_custom_table,
    parse_rate,
    rate_from_dict,
)

ALL = [Weibull(2.0, 1.0), Weibull(0.7, 2.0), GompertzMakeham(0.6, 0.1, 5.0), MusaOkumoto(1.0, 1.0), Constant(3.0)]


def test_weibull_cumulative():
    assert cumulative(Weibull(2.0, 1.0), 3.0) == 9.0


@pytest.mark.parametrize("rate", ALL + [CustomTable((0.0, 1.0, 2.0), (0.0, 1.0, 3.0))])
def test_zero_at_origin(rate):
    assert cumulative(rate, 0.0) == 0.0


def test_gompertz_makeham_value():
    # (a/b)(e^{bt} - 1) + mu t = 6 (e^5 - 1) + 250
    assert cumulative(GompertzMakeham(0.6, 0.1, 5.0), 50.0) == pytest.approx(6.0 * math.expm1(5.0) + 250.0, rel=1e-14)
    assert cumulative(GompertzMakeham(0.6, 0.1, 5.0), 50.0) == pytest.approx(1134.4789546, rel=1e-9)


def test_gompertz_makeham_table_form():
    r = GompertzMakeham(0.6, 0.1, 5.0, table_form=True)
    assert cumulative(r, 50.0) == pytest.approx(0.6 * math.expm1(5.0) + 250.0, rel=1e-14)
    assert check_consistency(r, np.linspace(0.0, 50.0, 101)) < 1e-4


def test_intensity_examples():
    assert intensity(Constant(2.0), 7.0) == 2.0
    assert intensity(MusaOkumoto(1.0, 1.0), 0.0) == 1.0
    assert intensity(Weibull(1.0, 2.0), 5.0) == pytest.approx(0.5, rel=1e-15)


def test_negative_time_and_divergent_intensity():
    with pytest.raises(DomainError):
        cumulative(Weibull(2.0, 1.0), -1.0)
    with pytest.raises(DomainError):
        intensity(Weibull(0.5, 1.0), 0.0)


def test_consistency_examples():
    assert check_consistency(Weibull(2.0, 1.0), np.arange(0.1, 10.0, 1e-4)) < 1e-5
    assert check_consistency(Constant(3.0), np.linspace(0.0, 100.0, 57)) < 1e-9
    assert check_consistency(GompertzMakeham(0.6, 0.1, 5.0), np.linspace(0.0, 50.0, 501)) < 1e-4


@pytest.mark.parametrize("rate", ALL)
def test_consistency_interior(rate):
    assert check_consistency(rate, np.linspace(0.05, 20.0, 400)) < 1e-4


@settings(max_examples=80, deadline=None)
@given(s=st.floats(0.0, 100.0), t=st.floats(0.0, 100.0), idx=st.integers(0, len(ALL) - 1))
def test_cumulative_monotone(s, t, idx):
    lo, hi = sorted((s, t))
    assert cumulative(ALL[idx], lo) <= cumulative(ALL[idx], hi)


@pytest.mark.parametrize("lam,alpha,beta", [(2.0, 0.7, 0.5), (0.5, 1.0, 0.8), (3.0, 0.4, 0.9)])
def test_homogeneous_reduction(lam, alpha, beta):
    c = lam ** (alpha / beta)
    assert cumulative(Constant(c), 4.0) == c * 4.0


@pytest.mark.parametrize("rate", ALL)
def test_inverse_cumulative_roundtrip(rate):
    for level in (0.0, 0.5, 3.0, 40.0):
        assert cumulative(rate, inverse_cumulative(rate, level)) == pytest.approx(level, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("bad", [{"a": 0.0, "b": 1.0}, {"a": 1.0, "b": -2.0}])
def test_parameter_validation(bad):
    with pytest.raises(DomainError):
        Weibull(**bad)


def test_custom_table_interpolation_and_slope():
    tab = CustomTable((0.0, 1.0, 3.0), (0.0, 2.0, 3.0))
    assert cumulative(tab, 0.5) == 1.0
    assert cumulative(tab, 2.0) == 2.5
    assert cumulative(tab, 5.0) == 4.0  # last slope continued
    assert intensity(tab, 0.5) == 2.0
    assert intensity(tab, 2.0) == 0.5


@pytest.mark.parametrize(
    "knots,values",
    [((0.0, 1.0, 1.0), (0.0, 1.0, 2.0)), ((0.0, 1.0, 2.0), (0.0, 2.0, 1.0)), ((0.0, 1.0), (0.5, 1.0))],
)
def test_custom_table_validation(knots, values):
    with pytest.raises(DomainError):
        CustomTable(knots, values)


def test_custom_table_csv(tmp_path):
    good = tmp_path / "good.csv"
    good.write_text("time,Lambda\n0,0\n1,0.5\n2,2\n")
    tab = load_custom_table(good)
    assert cumulative(tab, 1.5) == pytest.approx(1.25)
    bad = tmp_path / "bad.csv"
    bad.write_text("time,Lambda\n0,0\n1,0.5\n2,0.1\n")
    with pytest.raises(DomainError, match="row 4"):
        load_custom_table(bad)
    junk = tmp_path / "junk.csv"
    junk.write_text("time,Lambda\n0,0\nx,1\n")
    with pytest.raises(DomainError, match="row 3"):
        load_custom_table(junk)


def test_parse_rate_and_dict_roundtrip():
    assert parse_rate("weibull:a=2,b=1") == Weibull(2.0, 1.0)
    assert parse_rate("constant:lambda=3") == Constant(3.0)
    assert parse_rate("gm:a=0.6,b=0.1,mu=5") == GompertzMakeham(0.6, 0.1, 5.0)
    assert parse_rate("mo:a=1,b=2") == MusaOkumoto(1.0, 2.0)
    for r in ALL + [CustomTable((0.0, 1.0), (0.0, 2.0))]:
        assert rate_from_dict(r.to_dict()) == r
    with pytest.raises(DomainError):
        parse_rate("weibull:a=2")
    with pytest.raises(DomainError):
        parse_rate("lognormal:a=1")
