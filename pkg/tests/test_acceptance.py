"""Acceptance gate: every criterion from the delivery checklist, one
pass/fail line per sub-check.

Each sub-check prints PASS or FAIL before asserting, so a plain pytest run
documents the full scorecard. Three reference figures are internally
inconsistent with their own stated arithmetic; the sub-checks that encode
them are marked as expected failures with the discrepancy spelled out in
the reason string, and the faithful value is asserted in the module suites.
"""
import math
import time

import numpy as np
import pytest

from crossmarket.amm_v2 import (
    PoolSnapshotV2,
    apply_burn,
    apply_mint,
    init_snapshot,
    input_for_exact_out,
    swap_exact_in,
)
from crossmarket.amm_v3 import (
    LiquidityPosition,
    PriceDecimals,
    adjust_price,
    depth_profile,
    position_liquidity,
    tick_to_price,
)
from crossmarket.arbitrage import GasFeeModel, scan
from crossmarket.cli import main
from crossmarket.discovery import (
    alpha_perp,
    gg_decompose,
    hasbrouck_is,
    lr_test_alpha_direction,
)
from crossmarket.leadlag import hy_corr, lead_lag_profile
from crossmarket.marketdata import (
    AlignedPair,
    SyntheticPairConfig,
    TickSeries,
    resample_last,
    simulate_cointegrated_pair,
)
from crossmarket.vecm import (
    TRACE_CRITICAL_VALUES,
    VecmFit,
    estimate_vecm,
    johansen_trace,
)


def check(label, ok):
    print(f"{'PASS' if ok else 'FAIL'}  {label}")
    return bool(ok)


def series_from_returns(returns, market_id="m", clock="tick_time"):
    levels = np.concatenate([[0.0], np.cumsum(returns)])
    prices = 100.0 * np.exp(levels)
    times = np.arange(len(prices), dtype=np.int64)
    return TickSeries(market_id, times, prices, clock)


class TestAC1GoldenSwap:
    def test_post_x_balance_and_runtime(self):
        snap = PoolSnapshotV2(x=1000.0, y=4000.0, lp_supply=1000.0, fee=0.003)
        quote = swap_exact_in(snap, 10.0)
        assert check(
            "AC1 post-trade x balance 1009.97",
            abs(1000.0 + quote.input_effective - 1009.97) <= 0.01,
        )
        start = time.perf_counter()
        swap_exact_in(snap, 10.0)
        elapsed = time.perf_counter() - start
        assert check("AC1 swap runtime < 1 ms", elapsed < 1e-3)

    @pytest.mark.xfail(
        strict=True,
        reason="reference prints output 38.93, but its own fee form gives "
        "4000 - 4000000/1009.97 = 39.4863; module suite asserts the "
        "consistent value",
    )
    def test_output_matches_printed_figure(self):
        quote = swap_exact_in(
            PoolSnapshotV2(x=1000.0, y=4000.0, lp_supply=1000.0, fee=0.003), 10.0
        )
        assert check("AC1 output 38.93 +/- 0.01", abs(quote.output - 38.93) <= 0.01)

    @pytest.mark.xfail(
        strict=True,
        reason="reference prints post-trade y 3961.07, but 4000000/1009.97 "
        "= 3960.5137; follows from the output discrepancy",
    )
    def test_post_y_balance_matches_printed_figure(self):
        quote = swap_exact_in(
            PoolSnapshotV2(x=1000.0, y=4000.0, lp_supply=1000.0, fee=0.003), 10.0
        )
        assert check(
            "AC1 post-trade y balance 3961.07",
            abs(4000.0 - quote.output - 3961.07) <= 0.01,
        )


class TestAC2SlippageGolden:
    def test_exact_output_cost(self):
        quote = input_for_exact_out(
            PoolSnapshotV2(x=20_000.0, y=10.0, lp_supply=1.0, fee=0.0), 1.0
        )
        assert check(
            "AC2 buying 1 ETH from (10 ETH, 20000 USDC) costs 2222.22",
            abs(quote.input_gross - 2222.22) <= 0.01,
        )


class TestAC3LpTokenGolden:
    def test_integer_init_supply(self):
        snap = init_snapshot(50_000_000_000, 110_351_100_000, 1000)
        assert check(
            "AC3 lp_supply 74280245364 exactly (integer mode)",
            snap.lp_supply == 74_280_245_364,
        )
        assert check("AC3 burned floor 1000", snap.lp_burned == 1000)


MKT = 200618
DEC = PriceDecimals(d_x=6, d_y=18)


class TestAC4V3Goldens:
    @pytest.mark.parametrize("tick,printed", [
        (0, 1.0), (10, 1.0010), (100, 1.0100), (1000, 1.1052), (2000, 1.2214),
    ])
    def test_tick_prices(self, tick, printed):
        value = tick_to_price(tick)
        assert check(
            f"AC4 tick {tick} price {printed} (4 digits)",
            round(value, 4) == printed,
        )

    def test_human_price_adjustment(self):
        human, _ = adjust_price(tick_to_price(MKT), DEC)
        assert check(
            "AC4 adjusted price 0.00051558 +/- 1 last digit",
            abs(human - 0.00051558) <= 1e-8,
        )

    @pytest.mark.xfail(
        strict=True,
        reason="reference prints inverse 1939.56, but 1/0.000515576875 = "
        "1939.5747; module suite asserts the consistent inverse",
    )
    def test_inverse_price_matches_printed_figure(self):
        _, inverse = adjust_price(tick_to_price(MKT), DEC)
        assert check(
            "AC4 inverse price 1939.56 +/- 0.01", abs(inverse - 1939.56) <= 0.01
        )

    def test_position_liquidity_and_counter_deposit(self):
        liq, counter_x = position_liquidity(50e18, "y", MKT, 200520, 200640)
        assert check(
            "AC4 L_pos 4.505e17 +/- 0.1%", abs(liq / 4.505e17 - 1.0) <= 1e-3
        )
        assert check(
            "AC4 x_pos 21812 +/- 0.1%",
            abs(counter_x / 10**DEC.d_x / 21812.0 - 1.0) <= 1e-3,
        )

    def test_depth_table_reserve_triple(self):
        positions = [
            LiquidityPosition(i_lower=200520, i_upper=200640, liquidity=4.5052e17),
            LiquidityPosition(i_lower=200580, i_upper=200640, liquidity=9.2809e17),
            LiquidityPosition(i_lower=200580, i_upper=200700, liquidity=1.3921e18),
        ]
        rows = depth_profile(positions, 60, MKT, DEC)
        triple = [(row.x, row.y) for row in rows]
        printed = [(0.0, 30.58), (134159.0, 119.42), (183427.0, 0.0)]
        for (x, y), (px, py), lower in zip(triple, printed, (200520, 200580, 200640)):
            ok_x = x == 0.0 if px == 0.0 else abs(x / px - 1.0) <= 1e-3
            ok_y = y == 0.0 if py == 0.0 else abs(y / py - 1.0) <= 1e-3
            assert check(f"AC4 depth range {lower} reserves ({px}, {py}) +/- 0.1%",
                         ok_x and ok_y)


TICK_X = [0.01, 0.02, 0.03, 0.04, 0.05]
TICK_Y = [0.02, -0.01, 0.01, -0.02, 0.03]
TRADE_X = [0.01, 0.02, 0.0, 0.0, 0.12]
TRADE_Y = [0.0, -0.01, 0.01, 0.0, 0.01]


class TestAC5HyGoldens:
    def test_tick_time_correlation(self):
        rho = hy_corr(series_from_returns(TICK_X, "x"), series_from_returns(TICK_Y, "y"))
        assert check("AC5 tick-time rho 0.309 +/- 0.001", abs(rho - 0.309) <= 1e-3)

    @pytest.mark.xfail(
        strict=True,
        reason="reference prints 0.474 for the trade-time columns, but their "
        "own sum is 0.001/sqrt(0.0149*0.0003) = 0.47298, which misses the "
        "0.001 band by 1.6e-5; module suite asserts the consistent value",
    )
    def test_trade_time_correlation_matches_printed_figure(self):
        rho = hy_corr(
            series_from_returns(TRADE_X, "x", "trade_time"),
            series_from_returns(TRADE_Y, "y", "trade_time"),
        )
        assert check("AC5 trade-time rho 0.474 +/- 0.001", abs(rho - 0.474) <= 1e-3)


class TestAC6GasArbGoldens:
    def test_per_leg_fee(self):
        model = GasFeeModel(gas_price_gwei=98.68, eth_usd=3100.0)
        assert check(
            "AC6 per-leg fee 0.004934 ETH to 6 decimals",
            round(model.fee_eth, 6) == 0.004934,
        )

    def test_fee_share_of_spread(self):
        pair = AlignedPair(
            ("cex", "defi"),
            np.array([0], dtype=np.int64),
            np.array([3503.95]),
            np.array([3538.99]),
        )
        op = scan(pair, GasFeeModel(gas_price_gwei=98.68, eth_usd=3100.0))[0]
        assert check(
            "AC6 fee share 87.3% +/- 0.2",
            abs(op.fee_pct_of_spread - 0.873) <= 0.002,
        )

    def test_five_row_table_nets(self):
        times = np.array([0, 1000, 2000, 3000, 4000], dtype=np.int64)
        cex = np.array([3503.95, 3505.42, 3506.40, 3507.64, 3508.80])
        defi = np.full(5, 3538.99)
        ops = scan(
            AlignedPair(("cex", "defi"), times, cex, defi),
            GasFeeModel(gas_price_gwei=98.68, eth_usd=3538.71),
        )
        printed = [0.11, -1.36, -2.34, -3.58, -4.74]
        for op, net in zip(ops, printed):
            assert check(
                f"AC6 net for centralized {op.price_centralized} within "
                f"0.05 of {net}",
                abs(op.net_usd - net) <= 0.05,
            )


class TestAC7CriticalValues:
    def test_lookup_pairs(self):
        uc = TRACE_CRITICAL_VALUES["unrestricted-constant"]
        none = TRACE_CRITICAL_VALUES["none"]
        assert check(
            "AC7 unrestricted-constant/90 -> (13.43, 2.705)",
            abs(uc[2][90] - 13.43) <= 0.005 and abs(uc[1][90] - 2.705) <= 0.001,
        )
        assert check(
            "AC7 none/90 -> (10.47, 2.976)",
            abs(none[2][90] - 10.47) <= 0.005 and abs(none[1][90] - 2.976) <= 0.001,
        )

    def test_surfaced_by_trace_test(self):
        rng = np.random.default_rng(0)
        Y = np.cumsum(rng.normal(size=(500, 2)), axis=0)
        res = johansen_trace(Y, det_spec="unrestricted-constant", level=90)
        assert check(
            "AC7 johansen result carries the lookup pair",
            res.critical_values == (13.4294, 2.7055),
        )


N_SEEDS = 100
MC_N = 10_000


@pytest.fixture(scope="module")
def mc_counts():
    """One seeded sweep shared by all oracle sub-checks; wall time recorded."""
    counts = {
        "rank1": 0, "rank0": 0, "is_mid": 0,
        "gg_accept": 0, "gg_reject": 0, "llr": 0, "lag": 0,
    }
    start = time.perf_counter()
    for seed in range(N_SEEDS):
        s1, s2 = simulate_cointegrated_pair(SyntheticPairConfig(
            n=MC_N, alpha=(0.0, 0.5), rho=0.2, seed=seed))
        Y = np.column_stack([np.log(s1.prices), np.log(s2.prices)])
        if johansen_trace(Y, det_spec="none").selected_rank == 1:
            counts["rank1"] += 1
        fit = estimate_vecm(Y, det_spec="none")
        if hasbrouck_is(fit).midpoint[0] > 0.9:
            counts["is_mid"] += 1
        if lr_test_alpha_direction(Y, det_spec="none",
                                   direction=(0.0, 1.0)).p_value > 0.05:
            counts["gg_accept"] += 1
        if lr_test_alpha_direction(Y, det_spec="none",
                                   direction=(1.0, 0.0)).p_value < 0.05:
            counts["gg_reject"] += 1

        i1, i2 = simulate_cointegrated_pair(SyntheticPairConfig(
            n=MC_N, alpha=(0.0, 0.0), seed=seed + 1000))
        Yi = np.column_stack([np.log(i1.prices), np.log(i2.prices)])
        if johansen_trace(Yi, det_spec="none").selected_rank == 0:
            counts["rank0"] += 1

        l1, l2 = simulate_cointegrated_pair(SyntheticPairConfig(
            n=MC_N, alpha=(0.0, 0.5), rho=0.2, noise_sd=(1.0, 0.1),
            leader_lag_ms=100, seed=seed + 2000))
        profile = lead_lag_profile(l1, l2)
        if profile.llr > 1.0:
            counts["llr"] += 1
        # one default-grid step around 100 ms is 5 ms
        if abs(profile.hy_lead_lag_ms - 100) <= 5:
            counts["lag"] += 1
    counts["elapsed"] = time.perf_counter() - start
    return counts


class TestAC8OracleSuite:
    def test_runtime_budget(self, mc_counts):
        assert check(
            f"AC8 total runtime {mc_counts['elapsed']:.1f}s < 60s",
            mc_counts["elapsed"] < 60.0,
        )

    def test_rank_selection(self, mc_counts):
        assert check(
            f"AC8 cointegrated -> rank 1 in {mc_counts['rank1']}/100 (need 80)",
            mc_counts["rank1"] >= 80,
        )
        assert check(
            f"AC8 independent -> rank 0 in {mc_counts['rank0']}/100 (need 80)",
            mc_counts["rank0"] >= 80,
        )

    def test_information_share_midpoint(self, mc_counts):
        assert check(
            f"AC8 IS leader midpoint > 0.9 in {mc_counts['is_mid']}/100 (need 90)",
            mc_counts["is_mid"] >= 90,
        )

    def test_gg_lr_directions(self, mc_counts):
        assert check(
            f"AC8 LR accepts (0,1) in {mc_counts['gg_accept']}/100 (need 90)",
            mc_counts["gg_accept"] >= 90,
        )
        assert check(
            f"AC8 LR rejects (1,0) in {mc_counts['gg_reject']}/100 (need 95)",
            mc_counts["gg_reject"] >= 95,
        )

    def test_hy_lead_lag(self, mc_counts):
        assert check(
            f"AC8 HY LLR > 1 in {mc_counts['llr']}/100 (need 90)",
            mc_counts["llr"] >= 90,
        )
        assert check(
            f"AC8 lead_lag_time within one grid step of 100 ms in "
            f"{mc_counts['lag']}/100 (need 90)",
            mc_counts["lag"] >= 90,
        )


class TestAC9PropertySuites:
    """One concrete instance of each fixture-free invariant; the full
    randomized versions live in the per-module suites."""

    def test_constant_product_exactness(self):
        pool = PoolSnapshotV2(x=1000.0, y=4000.0, lp_supply=1000.0, fee=0.003)
        quote = swap_exact_in(pool, 37.0)
        product = (pool.x + quote.input_effective) * (pool.y - quote.output)
        assert check(
            "AC9 fee-adjusted product preserved",
            abs(product / (pool.x * pool.y) - 1.0) <= 1e-12,
        )

    def test_mint_burn_round_trip(self):
        pool = PoolSnapshotV2(x=900.0, y=3600.0, lp_supply=450.0)
        minted_pool, minted = apply_mint(pool, 90.0, 360.0)
        _, ax, ay = apply_burn(minted_pool, minted)
        assert check(
            "AC9 mint then burn returns deposits",
            abs(ax - 90.0) <= 1e-9 and abs(ay - 360.0) <= 1e-9,
        )

    def _fit(self, alpha, omega):
        return VecmFit(
            alpha=np.asarray(alpha, dtype=float).reshape(2, 1),
            beta=np.array([[1.0], [-1.0]]),
            gamma=(),
            omega=np.asarray(omega, dtype=float),
            residuals=np.zeros((10, 2)),
            loglik=0.0,
            lags_p=1,
            det_spec="none",
            eigenvalues=(0.1, 0.0),
        )

    def test_is_sum_to_one_and_diagonal_invariance(self):
        correlated = self._fit((-0.2, 0.3), [[1.0, 0.3], [0.3, 2.0]])
        shares = hasbrouck_is(correlated)
        assert check(
            "AC9 IS sums to one in both orderings",
            abs(sum(shares.ordering_12) - 1.0) <= 1e-10
            and abs(sum(shares.ordering_21) - 1.0) <= 1e-10,
        )
        diagonal = self._fit((-0.2, 0.3), [[1.5, 0.0], [0.0, 0.7]])
        d = hasbrouck_is(diagonal)
        assert check(
            "AC9 diagonal-covariance orderings coincide",
            max(abs(a - b) for a, b in zip(d.ordering_12, d.ordering_21)) <= 1e-10,
        )

    def test_alpha_perp_orthogonality(self):
        vec = np.array([-0.37, 0.54])
        assert check(
            "AC9 alpha_perp orthogonal to alpha",
            abs(float(vec @ alpha_perp(vec))) <= 1e-12,
        )

    def test_gg_reconstruction_identity(self):
        fit = self._fit((0.0, 0.4), [[1.0, 0.1], [0.1, 1.0]])
        rng = np.random.default_rng(3)
        Y = np.cumsum(rng.normal(size=(50, 2)), axis=0)
        decomp = gg_decompose(fit, Y)
        rebuilt = decomp.permanent[:, None] @ decomp.A1.T + decomp.transitory
        assert check(
            "AC9 permanent + transitory rebuilds the data",
            float(np.max(np.abs(rebuilt - Y))) <= 1e-9,
        )

    def test_hy_sweep_equals_naive_and_pearson(self):
        rng = np.random.default_rng(11)
        gaps = lambda: np.cumsum(np.maximum(1, rng.poisson(90, 40)))
        X = TickSeries("x", gaps(), 50.0 * np.exp(np.cumsum(rng.normal(0, 0.01, 40))))
        Y = TickSeries("y", gaps(), 60.0 * np.exp(np.cumsum(rng.normal(0, 0.01, 40))))
        tx, ty = X.timestamps.tolist(), Y.timestamps.tolist()
        rx = np.diff(np.log(X.prices)).tolist()
        ry = np.diff(np.log(Y.prices)).tolist()
        terms = [
            rx[i] * ry[j]
            for i in range(len(rx))
            for j in range(len(ry))
            if tx[i] < ty[j + 1] and ty[j] < tx[i + 1]
        ]
        naive = math.fsum(terms) / math.sqrt(
            math.fsum(r * r for r in rx) * math.fsum(r * r for r in ry)
        )
        assert check("AC9 sweep equals naive double loop", hy_corr(X, Y) == naive)

        sync_x = series_from_returns(TICK_X, "sx")
        sync_y = series_from_returns(TICK_Y, "sy")
        vx, vy = np.array(TICK_X), np.array(TICK_Y)
        pearson = float(vx @ vy / np.sqrt((vx @ vx) * (vy @ vy)))
        assert check(
            "AC9 synchronous case equals Pearson form",
            abs(hy_corr(sync_x, sync_y) - pearson) <= 1e-12,
        )

    def test_llr_reciprocal_identity(self):
        cfg = SyntheticPairConfig(n=1500, alpha=(0.0, 0.5), rho=0.2,
                                  noise_sd=(1.0, 0.1), leader_lag_ms=100, seed=5)
        X, Y = simulate_cointegrated_pair(cfg)
        forward = lead_lag_profile(X, Y).llr
        backward = lead_lag_profile(Y, X).llr
        assert check(
            "AC9 LLR(Y,X) is the reciprocal of LLR(X,Y)",
            abs(forward * backward - 1.0) <= 1e-9,
        )

    def test_resample_idempotence(self):
        ticks = TickSeries(
            "m",
            np.array([0, 1700, 2400, 9100], dtype=np.int64),
            np.array([10.0, 11.0, 10.5, 12.0]),
        )
        bars = resample_last(ticks, 500)
        again = resample_last(
            TickSeries("m", bars.timestamps, bars.prices), 500
        )
        assert check(
            "AC9 resampling a bar series at its own interval is the identity",
            np.array_equal(bars.timestamps, again.timestamps)
            and np.array_equal(bars.prices, again.prices),
        )

    def test_report_determinism(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", "--n", "400", "--alpha", "0,0.5", "--rho", "0.2",
                     "--seed", "21", "--out-a", str(a), "--out-b", str(b)]) == 0
        out = tmp_path / "r.json"
        args = ["analyze", "--input-a", str(a), "--input-b", str(b),
                "--det-spec", "none", "--analyses", "johansen,vecm,granger",
                "--output", str(out)]
        assert main(args) == 0
        first = out.read_bytes()
        out.unlink()
        assert main(args) == 0
        assert check("AC9 identical runs emit identical bytes",
                     out.read_bytes() == first)
