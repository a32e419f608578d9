import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sst

from casecart.stats import (SummaryStats, mean_ci, paired_t, stdev_ci, upper_test, welch_t, welch_test)

Z975 = 1.959963984540054  # standard normal 97.5% quantile


def test_summary_stats_basic():
    s = SummaryStats.of([1, 2, 3, 4])
    assert (s.n, s.mean) == (4, 2.5)
    assert s.sd == pytest.approx(math.sqrt(5 / 3))
    assert SummaryStats.of([]).empty
    assert SummaryStats.of([7.0]).sd == 0.0


def test_mean_ci_large_sample_uses_normal_quantile():
    ci = mean_ci(SummaryStats(1062, 2.31, 1.16))
    hw = Z975 * 1.16 / math.sqrt(1062)
    assert ci.lo == pytest.approx(2.31 - hw, abs=1e-12)
    assert ci.hi == pytest.approx(2.31 + hw, abs=1e-12)


def test_mean_ci_small_sample_uses_t_quantile():
    # t_{0.975, 9} = 2.262157 from tables
    ci = mean_ci(SummaryStats(10, 5.0, 2.0))
    assert ci.half_width == pytest.approx(2.262157 * 2.0 / math.sqrt(10), rel=1e-6)


def test_stdev_ci_against_chi_square_table():
    # chi-square 0.025 and 0.975 quantiles for 29 df: 16.047, 45.722
    ci = stdev_ci(SummaryStats(30, 0.0, 1.0))
    assert ci.lo == pytest.approx(math.sqrt(29 / 45.722), abs=1e-4)
    assert ci.hi == pytest.approx(math.sqrt(29 / 16.047), abs=1e-4)


def test_ci_needs_two_observations():
    with pytest.raises(ValueError):
        mean_ci(SummaryStats(1, 1.0, 0.0))


def test_welch_matches_scipy():
    a, b = SummaryStats(1062, 2.31, 1.16), SummaryStats(1121, 1.36, 0.77)
    t, df = welch_t(a, b)
    ref = sst.ttest_ind_from_stats(2.31, 1.16, 1062, 1.36, 0.77, 1121, equal_var=False)
    assert t == pytest.approx(ref.statistic, rel=1e-10)
    assert welch_test(a, b) == pytest.approx(ref.pvalue, rel=1e-8, abs=1e-300)
    assert t == pytest.approx(22.4, abs=0.1)
    assert df > 1000


def test_welch_identical_samples_p_one():
    s = SummaryStats(50, 3.0, 1.0)
    assert welch_test(s, s) == 1.0


@given(st.lists(st.floats(-100, 100), min_size=3, max_size=40),
       st.lists(st.floats(-100, 100), min_size=3, max_size=40))
@settings(max_examples=60, deadline=None)
def test_paired_t_matches_scipy(a, b):
    n = min(len(a), len(b))
    a, b = a[:n], b[:n]
    d = np.subtract(a, b)
    if np.ptp(d) < 1e-9:
        return
    mean, p = paired_t(a, b)
    ref = sst.ttest_rel(a, b)
    assert mean == pytest.approx(d.mean(), abs=1e-9)
    assert p == pytest.approx(ref.pvalue, rel=1e-6, abs=1e-12)


def test_paired_t_degenerate_cases():
    assert paired_t([1, 2, 3], [1, 2, 3]) == (0.0, 1.0)
    assert paired_t([2, 3, 4], [1, 2, 3]) == (1.0, 0.0)
    with pytest.raises(ValueError):
        paired_t([1, 2], [1])


def test_upper_test_one_sided():
    rej, p = upper_test([5.0, 5.2, 4.9, 5.1, 5.05], 1.0)
    assert rej and p < 1e-4
    rej, p = upper_test([0.0, 0.1, 0.0, 0.2], 1.0)
    assert not rej and p > 0.5
    ref = sst.ttest_1samp([1.2, 0.8, 1.5, 1.1], 1.0, alternative="greater").pvalue
    assert upper_test([1.2, 0.8, 1.5, 1.1], 1.0)[1] == pytest.approx(ref, rel=1e-10)
    assert upper_test([0.0, 0.0, 0.0], 0.0) == (False, 1.0)


@given(st.integers(2, 5000), st.floats(-50, 50), st.floats(0.01, 20))
@settings(max_examples=80, deadline=None)
def test_ci_contains_mean_and_is_symmetric(n, m, sd):
    ci = mean_ci(SummaryStats(n, m, sd))
    assert ci.lo < m < ci.hi
    assert (m - ci.lo) == pytest.approx(ci.hi - m, rel=1e-9)
    sci = stdev_ci(SummaryStats(n, m, sd))
    assert sci.lo < sd < sci.hi
