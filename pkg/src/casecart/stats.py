"""Output analysis: summary statistics, confidence intervals, t-tests."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from scipy import stats as _st


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    sd: float

    @classmethod
    def of(cls, values: Iterable[float]) -> "SummaryStats":
        xs = [float(v) for v in values]
        n = len(xs)
        if n == 0:
            return EMPTY
        mean = math.fsum(xs) / n
        if n < 2:
            return cls(n, mean, 0.0)
        ss = math.fsum((x - mean) ** 2 for x in xs)
        return cls(n, mean, math.sqrt(ss / (n - 1)))

    @property
    def empty(self) -> bool:
        return self.n == 0


EMPTY = SummaryStats(0, math.nan, math.nan)


@dataclass(frozen=True)
class ConfidenceInterval:
    lo: float
    hi: float
    level: float = 0.95

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def half_width(self) -> float:
        return (self.hi - self.lo) / 2.0


def _need_two(s: SummaryStats) -> None:
    if s.n < 2:
        raise ValueError(f"need at least 2 observations, got n={s.n}")


def mean_ci(s: SummaryStats, level: float = 0.95) -> ConfidenceInterval:
    """Two-sided CI for the mean.

    Student-t critical value below 30 observations, normal above.
    """
    _need_two(s)
    q = 0.5 + level / 2.0
    crit = _st.t.ppf(q, s.n - 1) if s.n < 30 else _st.norm.ppf(q)
    hw = crit * s.sd / math.sqrt(s.n)
    return ConfidenceInterval(s.mean - hw, s.mean + hw, level)


def stdev_ci(s: SummaryStats, level: float = 0.95) -> ConfidenceInterval:
    """Chi-square CI for the standard deviation of a normal population."""
    _need_two(s)
    alpha = 1.0 - level
    df = s.n - 1
    upper_q = _st.chi2.ppf(1.0 - alpha / 2.0, df)
    lower_q = _st.chi2.ppf(alpha / 2.0, df)
    return ConfidenceInterval(s.sd * math.sqrt(df / upper_q), s.sd * math.sqrt(df / lower_q), level)


def welch_t(a: SummaryStats, b: SummaryStats) -> tuple[float, float]:
    """Welch statistic and Welch-Satterthwaite degrees of freedom."""
    va, vb = a.sd**2 / a.n, b.sd**2 / b.n
    se2 = va + vb
    if se2 == 0.0:
        return (0.0 if a.mean == b.mean else math.copysign(math.inf, a.mean - b.mean)), math.inf
    t = (a.mean - b.mean) / math.sqrt(se2)
    denom = (va**2 / (a.n - 1) if va else 0.0) + (vb**2 / (b.n - 1) if vb else 0.0)
    return t, se2**2 / denom


def welch_test(a: SummaryStats, b: SummaryStats) -> float:
    """Two-sided p-value of Welch's unequal-variance t-test."""
    _need_two(a)
    _need_two(b)
    t, df = welch_t(a, b)
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    return float(min(1.0, 2.0 * _st.t.sf(abs(t), df)))


def paired_t(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Paired t-test of ``mean(a - b) = 0``; returns ``(mean_diff, two-sided p)``.

    Identical samples give ``p = 1``; a constant non-zero difference gives 0.
    """
    if len(a) != len(b):
        raise ValueError("paired samples must have equal length")
    d = SummaryStats.of(x - y for x, y in zip(a, b))
    _need_two(d)
    if d.sd == 0.0:
        return d.mean, (1.0 if d.mean == 0.0 else 0.0)
    t = d.mean / (d.sd / math.sqrt(d.n))
    return d.mean, float(2.0 * _st.t.sf(abs(t), d.n - 1))


def upper_test(values: Sequence[float], target: float, alpha: float = 0.05) -> tuple[bool, float]:
    """One-sided t-test of ``H0: mean <= target`` against ``mean > target``.

    Returns ``(rejected, p_value)``.
    """
    s = SummaryStats.of(values)
    _need_two(s)
    if s.sd == 0.0:
        p = 1.0 if s.mean <= target else 0.0
    else:
        t = (s.mean - target) / (s.sd / math.sqrt(s.n))
        p = float(_st.t.sf(t, s.n - 1))
    return p < alpha, p
