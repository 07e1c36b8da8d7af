import math

import numpy as np
import pytest

from crossmarket.errors import DegenerateSeries, ZeroDenominator
from crossmarket.leadlag import (
    LagGrid,
    LeadLagReport,
    default_grid,
    hy_corr,
    hy_corr_lagged,
    lead_lag_profile,
    lead_lag_ratio,
    profile_csv,
)
from crossmarket.marketdata import (
    SyntheticPairConfig,
    TickSeries,
    simulate_cointegrated_pair,
)


def series_from_returns(returns, timestamps=None, market_id="m", clock="tick_time"):
    """Price path whose log increments equal the given returns."""
    levels = np.concatenate([[0.0], np.cumsum(returns)])
    prices = 100.0 * np.exp(levels)
    if timestamps is None:
        timestamps = np.arange(len(prices), dtype=np.int64)
    return TickSeries(market_id, np.asarray(timestamps, dtype=np.int64), prices, clock)


def random_series(seed, n=60, mean_gap=120.0, market_id="m"):
    rng = np.random.default_rng(seed)
    gaps = np.maximum(1, np.rint(rng.exponential(mean_gap, n))).astype(np.int64)
    times = np.cumsum(gaps)
    prices = 50.0 * np.exp(np.cumsum(rng.normal(0.0, 0.01, n)))
    return TickSeries(market_id, times, prices, "trade_time")


def naive_hy(X, Y, lag_ms=0):
    """O(n*m) double-loop oracle with the same exactly rounded summation."""
    tx = X.timestamps.tolist()
    ty = [int(t) - lag_ms for t in Y.timestamps.tolist()]
    rx = np.diff(np.log(X.prices)).tolist()
    ry = np.diff(np.log(Y.prices)).tolist()
    terms = []
    for i in range(len(rx)):
        for j in range(len(ry)):
            if tx[i] < ty[j + 1] and ty[j] < tx[i + 1]:
                terms.append(rx[i] * ry[j])
    ssx = math.fsum(r * r for r in rx)
    ssy = math.fsum(r * r for r in ry)
    return math.fsum(terms) / math.sqrt(ssx * ssy)


TICK_X = [0.01, 0.02, 0.03, 0.04, 0.05]
TICK_Y = [0.02, -0.01, 0.01, -0.02, 0.03]
TRADE_X = [0.01, 0.02, 0.0, 0.0, 0.12]
TRADE_Y = [0.0, -0.01, 0.01, 0.0, 0.01]


class TestLagGrid:
    def test_default_grid_shape(self):
        grid = default_grid()
        lags = grid.lags_ms
        assert 0 in lags
        assert len(lags) == 217
        assert lags == tuple(sorted(lags))
        for probe in (5, 500, 600, 1000, 2000, 5000, 10000):
            assert probe in lags and -probe in lags
        assert 501 not in lags

    def test_positive_lags(self):
        grid = LagGrid.from_lags([-10, -5, 0, 5, 10])
        assert grid.positive_lags == (5, 10)

    def test_from_lags_sorts_and_dedupes(self):
        grid = LagGrid.from_lags([10, -10, 0, 10, -10])
        assert grid.lags_ms == (-10, 0, 10)

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            LagGrid((-5, 0, 10))

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError):
            LagGrid((5, -5, 0))

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            LagGrid((-5, 0, 5, 5))

    def test_non_integer_rejected(self):
        with pytest.raises(ValueError):
            LagGrid((-5.5, 0, 5.5))
        with pytest.raises(ValueError):
            LagGrid((False, True))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            LagGrid(())


class TestHyCorr:
    def test_worked_example_tick_returns(self):
        x = series_from_returns(TICK_X)
        y = series_from_returns(TICK_Y)
        rho = hy_corr(x, y)
        expected = 0.001 / math.sqrt(0.0055 * 0.0019)
        assert rho == pytest.approx(expected, rel=1e-9)
        assert rho == pytest.approx(0.309, abs=1e-3)

    def test_worked_example_trade_returns(self):
        x = series_from_returns(TRADE_X)
        y = series_from_returns(TRADE_Y)
        rho = hy_corr(x, y)
        # The reference table prints 0.474 for these columns, but its own
        # sum works out to 0.001 / sqrt(0.0149 * 0.0003) = 0.47298; the
        # printed value is a rounding slip. Assert the exact arithmetic.
        expected = 0.001 / math.sqrt(0.0149 * 0.0003)
        assert rho == pytest.approx(expected, rel=1e-9)
        assert rho == pytest.approx(0.472984, abs=5e-6)

    def test_identical_series(self):
        x = random_series(3)
        assert hy_corr(x, x) == pytest.approx(1.0, abs=1e-12)

    def test_sweep_equals_naive_bitwise(self):
        for seed in range(25):
            x = random_series(seed, n=40 + seed, mean_gap=90.0)
            y = random_series(1000 + seed, n=60, mean_gap=150.0)
            assert hy_corr(x, y) == naive_hy(x, y)

    def test_synchronous_equals_cosine_of_increments(self):
        rng = np.random.default_rng(9)
        rx = rng.normal(0.0, 0.02, 80)
        ry = 0.6 * rx + rng.normal(0.0, 0.02, 80)
        x = series_from_returns(rx)
        y = series_from_returns(ry, market_id="n")
        cosine = float(rx @ ry / math.sqrt((rx @ rx) * (ry @ ry)))
        assert hy_corr(x, y) == pytest.approx(cosine, abs=1e-12)

    def test_price_scale_invariance(self):
        x = random_series(5)
        y = random_series(6)
        scaled = TickSeries("m", y.timestamps, 737.25 * y.prices, y.clock)
        assert hy_corr(x, scaled) == pytest.approx(hy_corr(x, y), abs=1e-12)

    def test_constant_series_degenerate(self):
        x = random_series(7)
        flat = TickSeries("m", np.array([0, 10, 20]), np.array([5.0, 5.0, 5.0]))
        with pytest.raises(DegenerateSeries):
            hy_corr(x, flat)
        with pytest.raises(DegenerateSeries):
            hy_corr(flat, x)

    def test_single_observation_degenerate(self):
        x = random_series(8)
        stub = TickSeries("m", np.array([0]), np.array([5.0]))
        with pytest.raises(DegenerateSeries):
            hy_corr(x, stub)

    def test_dropping_zero_increment_observation_exact(self):
        # The Y observation at t=2500 repeats the price seen at t=2200 and
        # no X interval boundary falls in (2200, 2500], so removing it
        # changes neither the term multiset nor the squared sums.
        x = TickSeries(
            "x",
            np.array([0, 1000, 2000, 3000, 4000]),
            np.array([100.0, 101.0, 100.5, 102.0, 101.2]),
        )
        with_zero = TickSeries(
            "y",
            np.array([100, 800, 2200, 2500, 3900]),
            np.array([50.0, 50.4, 50.1, 50.1, 50.9]),
        )
        without = TickSeries(
            "y",
            np.array([100, 800, 2200, 3900]),
            np.array([50.0, 50.4, 50.1, 50.9]),
        )
        assert hy_corr(x, with_zero) == hy_corr(x, without)
        # Lags chosen so the shifted window (2200-lag, 2500-lag] still
        # contains no X boundary; other lags would create new overlaps.
        for lag in (-300, 100):
            assert hy_corr_lagged(x, with_zero, lag) == hy_corr_lagged(
                x, without, lag
            )


class TestHyCorrLagged:
    def test_lag_zero_reduces_to_hy_corr(self):
        x = random_series(11)
        y = random_series(12)
        assert hy_corr_lagged(x, y, 0) == hy_corr(x, y)

    def test_delayed_copy_peaks_at_delay(self):
        x = random_series(13, n=120, mean_gap=100.0)
        y = TickSeries("y", x.timestamps + 70, x.prices, x.clock)
        assert hy_corr_lagged(x, y, 70) == pytest.approx(1.0, abs=1e-12)
        assert hy_corr_lagged(x, y, -70) < 0.9

    def test_role_swap_antisymmetry_bitwise(self):
        x = random_series(14)
        y = random_series(15)
        for lag in (-730, -1, 0, 1, 64, 2000):
            assert hy_corr_lagged(x, y, lag) == hy_corr_lagged(y, x, -lag)

    def test_lagged_sweep_equals_naive_bitwise(self):
        for seed in range(12):
            x = random_series(seed, n=50)
            y = random_series(500 + seed, n=45)
            for lag in (-300, -40, 25, 180):
                assert hy_corr_lagged(x, y, lag) == naive_hy(x, y, lag)


def leader_pair(seed, n=4000, noise=(1.0, 0.1), lag_ms=100):
    cfg = SyntheticPairConfig(
        n=n, alpha=(0.0, 0.5), noise_sd=noise, leader_lag_ms=lag_ms, seed=seed
    )
    return simulate_cointegrated_pair(cfg)


class TestLeadLagProfile:
    def test_profile_matches_pointwise_estimator(self):
        x = random_series(21, n=300, mean_gap=80.0)
        y = random_series(22, n=260, mean_gap=95.0)
        grid = LagGrid.from_lags([0, 3, -3, 50, -50, 250, -250, 1000, -1000])
        report = lead_lag_profile(x, y, grid)
        assert tuple(lag for lag, _ in report.profile) == grid.lags_ms
        for lag, rho in report.profile:
            assert rho == pytest.approx(hy_corr_lagged(x, y, lag), abs=1e-9)

    def test_self_profile_centered(self):
        x = random_series(23, n=150)
        report = lead_lag_profile(x, x, LagGrid.from_lags([0, 40, -40, 90, -90]))
        assert report.hy_lead_lag_ms == 0
        assert report.max_abs_corr == pytest.approx(1.0, abs=1e-12)
        # Role-swap symmetry makes rho(l) == rho(-l) here, so the ratio is 1.
        assert report.llr == pytest.approx(1.0, abs=1e-12)
        assert not report.degenerate

    def test_pure_leader_recovered(self):
        x, y = leader_pair(seed=101)
        report = lead_lag_profile(x, y)
        assert abs(report.hy_lead_lag_ms - 100) <= 5
        assert report.llr > 1.0
        assert report.max_abs_corr > 0.2

    def test_reciprocal_identity(self):
        x, y = leader_pair(seed=102)
        forward = lead_lag_profile(x, y)
        backward = lead_lag_profile(y, x)
        assert backward.llr < 1.0
        assert backward.llr == pytest.approx(1.0 / forward.llr, rel=1e-12)

    def test_grid_defaults_to_standard(self):
        x, y = leader_pair(seed=103, n=500)
        report = lead_lag_profile(x, y)
        assert len(report.profile) == 217

    def test_clock_label_propagates(self):
        x = random_series(24)
        y = random_series(25)
        report = lead_lag_profile(x, y, LagGrid.from_lags([0, 10, -10]))
        assert report.clock == "trade_time"

    def test_zero_negative_sum_flags_infinite_llr(self):
        rng = np.random.default_rng(26)
        x = TickSeries(
            "x", np.arange(0, 1100, 100), 10.0 * np.exp(rng.normal(0, 0.01, 11))
        )
        y = TickSeries(
            "y",
            np.arange(10000, 11100, 100),
            10.0 * np.exp(rng.normal(0, 0.01, 11)),
        )
        grid = LagGrid.from_lags([0, 9500, -9500])
        report = lead_lag_profile(x, y, grid)
        assert report.degenerate
        assert math.isinf(report.llr) and report.llr > 0
        assert report.hy_lead_lag_ms == 9500
        reverse = lead_lag_profile(y, x, grid)
        assert reverse.degenerate
        assert reverse.llr == 0.0

    def test_no_overlap_anywhere_flags_nan(self):
        x = TickSeries("x", np.array([0, 100, 200]), np.array([1.0, 1.1, 1.05]))
        y = TickSeries(
            "y", np.array([50000, 50100, 50200]), np.array([2.0, 2.1, 2.05])
        )
        report = lead_lag_profile(x, y, LagGrid.from_lags([0, 1000, -1000]))
        assert report.degenerate
        assert math.isnan(report.llr)
        assert report.max_abs_corr == 0.0
        assert report.hy_lead_lag_ms == 0

    def test_lead_lag_ratio_raises_on_zero_denominator(self):
        with pytest.raises(ZeroDenominator):
            lead_lag_ratio([(-5, 0.0), (0, 0.5), (5, 0.3)])

    def test_report_validation(self):
        with pytest.raises(ValueError):
            LeadLagReport(
                profile=((0, 0.5),),
                hy_lead_lag_ms=0,
                max_abs_corr=0.5,
                llr=-2.0,
                clock="tick_time",
            )
        with pytest.raises(ValueError):
            LeadLagReport(
                profile=((0, 0.5),),
                hy_lead_lag_ms=10,
                max_abs_corr=0.5,
                llr=1.0,
                clock="tick_time",
            )


class TestProfileCsv:
    def test_header_and_roundtrip(self):
        x = random_series(31, n=80)
        y = random_series(32, n=70)
        grid = LagGrid.from_lags([0, 20, -20, 100, -100])
        report = lead_lag_profile(x, y, grid)
        text = profile_csv(report)
        lines = text.splitlines()
        assert lines[0] == "lag_ms,rho"
        assert len(lines) == 1 + len(grid.lags_ms)
        assert text.endswith("\n")
        for line, (lag, rho) in zip(lines[1:], report.profile):
            lag_s, rho_s = line.split(",")
            assert int(lag_s) == lag
            assert float(rho_s) == rho
