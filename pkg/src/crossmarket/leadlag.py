"""Lead-lag measurement between two asynchronous tick series.

The core estimator correlates log-price increments over every pair of
inter-observation intervals that overlap in time, so no prior alignment or
resampling is needed. Shifting one series' intervals by a signed lag and
scanning a grid of lags yields a cross-correlation profile; the lag
maximizing |rho| and the ratio of squared correlations at positive versus
negative lags summarize who leads whom.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateSeries, ZeroDenominator
from .marketdata import TickSeries


@dataclass(frozen=True)
class LagGrid:
    """Symmetric, strictly increasing grid of signed lags in milliseconds."""

    lags_ms: Tuple[int, ...]

    def __post_init__(self):
        lags = tuple(self.lags_ms)
        if not lags:
            raise ValueError("lag grid must not be empty")
        for lag in lags:
            if not isinstance(lag, (int, np.integer)) or isinstance(lag, bool):
                raise ValueError("lags must be integers (milliseconds)")
        lags = tuple(int(lag) for lag in lags)
        if any(b <= a for a, b in zip(lags, lags[1:])):
            raise ValueError("lags must be strictly increasing with no duplicates")
        present = set(lags)
        if any(-lag not in present for lag in lags):
            raise ValueError("lag grid must be symmetric about 0")
        object.__setattr__(self, "lags_ms", lags)

    @classmethod
    def from_lags(cls, lags: Iterable[int]) -> "LagGrid":
        """Build a grid from any iterable, sorting and deduplicating."""
        return cls(tuple(sorted({int(lag) for lag in lags})))

    @property
    def positive_lags(self) -> Tuple[int, ...]:
        return tuple(lag for lag in self.lags_ms if lag > 0)


def default_grid() -> LagGrid:
    """Dense short-range grid plus sparse long-range probes.

    5 ms resolution out to half a second covers sub-100 ms lead times;
    coarser points out to 10 s cover bar-level analyses.
    """
    positive = list(range(5, 501, 5))
    positive += list(range(600, 1001, 100))
    positive += [2000, 5000, 10000]
    return LagGrid.from_lags([0] + positive + [-lag for lag in positive])


@dataclass(frozen=True)
class LeadLagReport:
    """Cross-correlation profile with its argmax lag and lead-lag ratio.

    llr sums squared correlations over strictly positive lags and divides
    by the same sum over strictly negative lags; values above 1 mean the
    first series leads. degenerate marks reports where one of those sums
    vanished, making llr 0, infinite, or undefined.
    """

    profile: Tuple[Tuple[int, float], ...]
    hy_lead_lag_ms: int
    max_abs_corr: float
    llr: float
    clock: str
    degenerate: bool = False

    def __post_init__(self):
        if not self.degenerate and not self.llr > 0.0:
            raise ValueError("llr must be positive unless flagged degenerate")
        if self.hy_lead_lag_ms not in {lag for lag, _ in self.profile}:
            raise ValueError("argmax lag must be a grid point")


def _increments(series: TickSeries):
    """Interval endpoints and log-price increments; guards degeneracy."""
    if len(series) < 2:
        raise DegenerateSeries(
            f"series {series.market_id!r} needs at least 2 observations"
        )
    times = series.timestamps
    incr = np.diff(np.log(series.prices))
    sum_sq = math.fsum(r * r for r in incr.tolist())
    if sum_sq == 0.0:
        raise DegenerateSeries(
            f"series {series.market_id!r} has zero squared-increment sum"
        )
    return times, incr, sum_sq


def hy_corr_lagged(X: TickSeries, Y: TickSeries, lag_ms: int) -> float:
    """Overlap-interval correlation with Y's intervals shifted back by lag_ms.

    An increment pair contributes when the half-open intervals
    ]t_{i-1}, t_i] and ]s_{j-1} - lag, s_j - lag] intersect. The two-pointer
    sweep costs O(n + m + overlaps); the numerator is accumulated with
    exactly rounded summation so term order cannot change the result.
    """
    tx, rx, ssx = _increments(X)
    ty, ry, ssy = _increments(Y)
    lag = int(lag_ms)
    x_times = tx.tolist()
    y_shifted = [int(t) - lag for t in ty.tolist()]
    rx_list = rx.tolist()
    ry_list = ry.tolist()
    n = len(rx_list)
    m = len(ry_list)
    terms = []
    j_lo = 0
    for i in range(n):
        a = x_times[i]
        b = x_times[i + 1]
        while j_lo < m and y_shifted[j_lo + 1] <= a:
            j_lo += 1
        j = j_lo
        while j < m and y_shifted[j] < b:
            terms.append(rx_list[i] * ry_list[j])
            j += 1
    return math.fsum(terms) / math.sqrt(ssx * ssy)


def hy_corr(X: TickSeries, Y: TickSeries) -> float:
    """Overlap-interval correlation at lag 0."""
    return hy_corr_lagged(X, Y, 0)


def _profile_correlations(X: TickSeries, Y: TickSeries, lags: Sequence[int]):
    """All grid correlations at once via prefix sums over the Y increments.

    For a fixed X interval the overlapping Y intervals form a contiguous
    index range, located with two binary searches per lag.
    """
    tx, rx, ssx = _increments(X)
    ty, ry, ssy = _increments(Y)
    denom = math.sqrt(ssx * ssy)
    x_start, x_end = tx[:-1], tx[1:]
    y_start, y_end = ty[:-1], ty[1:]
    prefix = np.concatenate([[0.0], np.cumsum(ry)])
    out = []
    for lag in lags:
        lo = np.searchsorted(y_end, x_start + lag, side="right")
        hi = np.searchsorted(y_start, x_end + lag, side="left")
        num = float(rx @ (prefix[hi] - prefix[lo]))
        out.append(num / denom)
    return out


def lead_lag_ratio(profile: Sequence[Tuple[int, float]]) -> float:
    """Ratio of summed squared correlations at positive vs negative lags.

    Lag 0 never contributes.
    """
    pos = math.fsum(rho * rho for lag, rho in profile if lag > 0)
    neg = math.fsum(rho * rho for lag, rho in profile if lag < 0)
    if neg == 0.0:
        raise ZeroDenominator(
            "all negative-lag correlations are zero; lead-lag ratio diverges"
        )
    return pos / neg


def _argmax_lag(profile: Sequence[Tuple[int, float]]) -> Tuple[int, float]:
    """Ties go to the smallest |lag|, then to the positive sign, so a flat
    profile cannot manufacture a lead."""
    best_key = None
    best = None
    for lag, rho in profile:
        key = (abs(rho), -abs(lag), lag)
        if best_key is None or key > best_key:
            best_key = key
            best = (lag, rho)
    return best


def lead_lag_profile(
    X: TickSeries, Y: TickSeries, grid: Optional[LagGrid] = None
) -> LeadLagReport:
    """Correlation profile over the lag grid with argmax and lead-lag ratio.

    A vanishing negative-lag (or positive-lag) sum cannot produce a finite
    positive ratio; such reports carry llr of +inf (0, or nan when both
    sides vanish) and are flagged degenerate instead of raising.
    """
    if grid is None:
        grid = default_grid()
    rhos = _profile_correlations(X, Y, grid.lags_ms)
    profile = tuple(zip(grid.lags_ms, rhos))
    lag_at_max, rho_at_max = _argmax_lag(profile)
    degenerate = False
    try:
        llr = lead_lag_ratio(profile)
    except ZeroDenominator:
        pos = math.fsum(r * r for lag, r in profile if lag > 0)
        llr = math.inf if pos > 0.0 else math.nan
        degenerate = True
    else:
        if llr == 0.0:
            degenerate = True
    return LeadLagReport(
        profile=profile,
        hy_lead_lag_ms=lag_at_max,
        max_abs_corr=abs(rho_at_max),
        llr=llr,
        clock=X.clock,
        degenerate=degenerate,
    )


def profile_csv(report: LeadLagReport) -> str:
    """Plot-ready CSV of the lag profile."""
    lines = ["lag_ms,rho"]
    lines.extend(f"{lag},{rho!r}" for lag, rho in report.profile)
    return "\n".join(lines) + "\n"
