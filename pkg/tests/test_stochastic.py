import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy import stats as sst

from casecart.durations import DEFAULT_TABLE, DurationTable
from casecart.kernel.rng import RngStream
from casecart.stochastic import (Beta, Constant, DistributionError, Erlang, Gamma, Lognormal, Triangular,
                                 lognormal_underlying, parse_distribution)


def test_lognormal_conversion_matches_closed_form():
    # sigma^2 = ln(1 + (s/m)^2), mu = ln m - sigma^2 / 2
    mu, sigma = lognormal_underlying(2.02, 2.12)
    s2 = math.log(1 + (2.12 / 2.02) ** 2)
    assert sigma == pytest.approx(math.sqrt(s2), rel=1e-12)
    assert mu == pytest.approx(math.log(2.02) - s2 / 2, rel=1e-12)
    # and the implied moments come back out
    assert math.exp(mu + sigma**2 / 2) == pytest.approx(2.02, rel=1e-12)
    assert math.sqrt((math.exp(sigma**2) - 1) * math.exp(2 * mu + sigma**2)) == pytest.approx(2.12, rel=1e-12)


@pytest.mark.parametrize("text,cls,mean", [
    ("LOGN(2.02, 2.12)", Lognormal, 2.02),
    ("0.01 + 4.81 * BETA(2.85, 4.03)", Beta, 0.01 + 4.81 * 2.85 / 6.88),
    ("GAMM(0.494, 5.44)", Gamma, 0.494 * 5.44),
    ("ERLA(0.454, 5)", Erlang, 0.454 * 5),
    ("12 * BETA(4.95, 25.8)", Beta, 12 * 4.95 / 30.75),
    ("TRIA(0.13, 0.83, 3.54)", Triangular, (0.13 + 0.83 + 3.54) / 3),
    ("0.27+LOGN(0.965,0.511)", Lognormal, 0.27 + 0.965),
    ("3", Constant, 3.0),
])
def test_parse_and_mean(text, cls, mean):
    d = parse_distribution(text)
    assert isinstance(d, cls)
    assert d.mean == pytest.approx(mean, rel=1e-12)


@pytest.mark.parametrize("bad", ["LOGN(1)", "FOO(1, 2)", "LOGN(-1, 1)", "BETA(0, 1)", "ERLA(1, 2.5)",
                                 "TRIA(3, 1, 2)", "LOGN(1,2", "", "2 * LOGN(a, 1)"])
def test_parse_errors(bad):
    with pytest.raises(DistributionError):
        parse_distribution(bad)


def _numeric_mean_var(d):
    """Moments from scipy densities, independent of the closed forms."""
    if isinstance(d, Lognormal):
        mu, sigma = lognormal_underlying(d.m, d.s)
        base = sst.lognorm(sigma, scale=math.exp(mu))
    elif isinstance(d, Beta):
        base = sst.beta(d.a, d.b)
    elif isinstance(d, Gamma):
        base = sst.gamma(d.alpha, scale=d.beta)
    elif isinstance(d, Erlang):
        base = sst.erlang(d.k, scale=d.beta)
    elif isinstance(d, Triangular):
        c = (d.mode - d.low) / (d.high - d.low)
        base = sst.triang(c, loc=d.low, scale=d.high - d.low)
    else:
        raise AssertionError(d)
    lo, hi = base.support()
    m = integrate.quad(lambda x: x * base.pdf(x), lo, hi, limit=200)[0]
    v = integrate.quad(lambda x: (x - m) ** 2 * base.pdf(x), lo, hi, limit=200)[0]
    return d.shift + d.scale * m, d.scale**2 * v


TABLE3 = sorted({expr for rows in DEFAULT_TABLE.values() for _, _, expr in rows})


@pytest.mark.parametrize("expr", TABLE3)
def test_closed_form_moments_match_density(expr):
    d = parse_distribution(expr)
    m, v = _numeric_mean_var(d)
    assert d.mean == pytest.approx(m, rel=1e-6)
    assert d.variance == pytest.approx(v, rel=1e-5)


@pytest.mark.parametrize("expr", TABLE3)
def test_samples_stay_in_support(expr):
    d = parse_distribution(expr)
    rng = RngStream(3, expr)
    lo, hi = d.support
    xs = [d.sample(rng) for _ in range(2000)]
    assert min(xs) >= lo and max(xs) <= hi


def test_erlang_equals_sum_of_exponentials_in_distribution():
    d = Erlang(0.0, 1.0, 0.454, 5)
    rng = RngStream(1, "erl")
    xs = np.array([d.sample(rng) for _ in range(20000)])
    ref = np.random.default_rng(2).exponential(0.454, size=(20000, 5)).sum(axis=1)
    assert sst.ks_2samp(xs, ref).pvalue > 0.001


def test_degenerate_triangular_is_constant():
    d = Triangular(0.0, 1.0, 2.0, 2.0, 2.0)
    assert d.sample(RngStream(1, "t")) == 2.0
    assert d.variance == 0.0


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0, 5), st.floats(0.1, 5))
@settings(max_examples=50, deadline=None)
def test_expression_round_trip(m, s, shift, scale):
    d = Lognormal(shift, scale, m, s)
    assert parse_distribution(d.expression()) == d


@given(st.floats(0, 10), st.floats(0, 10), st.floats(0, 10))
@settings(max_examples=50, deadline=None)
def test_triangular_mean_in_range(a, b, c):
    lo, mode, hi = sorted((a, b, c))
    d = Triangular(0.0, 1.0, lo, mode, hi)
    assert lo - 1e-12 <= d.mean <= hi + 1e-12
    assert d.variance >= -1e-12


# -- duration table ---------------------------------------------------------
def test_duration_row_selected_by_time_of_day():
    t = DurationTable()
    assert t.select("ENT", 7 * 60 + 59).expression() == "LOGN(2.02,2.12)"
    assert t.select("ENT", 8 * 60).expression() == "LOGN(1.62,1.2)"
    assert t.select("ENT", 23 * 60).expression() == "LOGN(1.23,0.672)"
    assert t.select("Vascular", 14 * 60).expression() == "TRIA(0.13,0.83,3.54)"
    assert t.select("Pediatric", 3 * 60).expression() == "LOGN(1.35,0.693)"


def test_gynecology_gap_uses_preceding_window():
    t = DurationTable()
    early = t.select("Gynecology", 7 * 60 + 30)
    for tod in (8 * 60, 11 * 60, 14 * 60 + 59):
        assert t.select("Gynecology", tod) == early
    assert t.select("Gynecology", 15 * 60 + 30).expression() == "0.27+LOGN(0.965,0.511)"
    assert t.select("Gynecology", 2 * 60).expression() == "LOGN(1.65,0.859)"


def test_duration_table_requires_all_services():
    with pytest.raises(ValueError):
        DurationTable({"ENT": [("00:00", "00:00", "LOGN(1, 1)")]})
