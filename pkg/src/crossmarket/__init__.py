"""AMM pool reconstruction and cross-market price discovery toolkit.

Two layers: pool-state simulation for constant-product and
concentrated-liquidity venues (amm_v2, amm_v3), and econometrics for
measuring which of two markets discovers price first (vecm, discovery,
leadlag), glued together by tick-data plumbing (marketdata), a
gas-fee-aware arbitrage scanner (arbitrage), and a CLI pipeline (cli).
"""

__version__ = "0.1.0"

from .amm_v2 import (
    MINIMUM_LIQUIDITY,
    PoolEvent,
    PoolSnapshotV2,
    ReplayResult,
    SwapQuote,
    apply_burn,
    apply_mint,
    apply_trade,
    infer_counterflow,
    infer_counterflow_y,
    init_snapshot,
    input_for_exact_out,
    replay_events,
    swap_exact_in,
)
from .amm_v3 import (
    MAX_TICK,
    DepthRow,
    LiquidityPosition,
    PriceDecimals,
    TickRangeReserves,
    adjust_price,
    aggregate_ranges,
    depth_profile,
    position_liquidity,
    price_to_tick,
    range_reserves,
    tick_to_price,
)
from .arbitrage import (
    ArbOpportunity,
    ArbSummary,
    GasFeeBreakdown,
    GasFeeModel,
    gas_fee,
    opportunities_csv,
    scan,
    summarize,
)
from .cli import PipelineConfig, Report, emit_report, main, run_pipeline
from .discovery import (
    InfoShares,
    LrAlphaTest,
    PTDecomposition,
    alpha_perp,
    gg_decompose,
    hasbrouck_is,
    lr_test_alpha_direction,
)
from .errors import CrossMarketError
from .leadlag import (
    LagGrid,
    LeadLagReport,
    default_grid,
    hy_corr,
    hy_corr_lagged,
    lead_lag_profile,
    lead_lag_ratio,
    profile_csv,
)
from .marketdata import (
    AlignedPair,
    BarSeries,
    EventWindow,
    SyntheticPairConfig,
    TickSeries,
    align_pair,
    log_returns,
    read_pool_events_jsonl,
    read_trades_csv,
    read_v3_positions_jsonl,
    resample_last,
    simulate_cointegrated_pair,
    window_slice,
)
from .vecm import (
    DET_SPECS,
    TRACE_CRITICAL_VALUES,
    GrangerRow,
    JohansenResult,
    ResidualDiagnostics,
    VecmFit,
    estimate_vecm,
    granger_f_test,
    johansen_trace,
    residual_diagnostics,
)

__all__ = [
    "__version__",
    "CrossMarketError",
    # amm_v2
    "MINIMUM_LIQUIDITY",
    "PoolEvent",
    "PoolSnapshotV2",
    "ReplayResult",
    "SwapQuote",
    "apply_burn",
    "apply_mint",
    "apply_trade",
    "infer_counterflow",
    "infer_counterflow_y",
    "init_snapshot",
    "input_for_exact_out",
    "replay_events",
    "swap_exact_in",
    # amm_v3
    "MAX_TICK",
    "DepthRow",
    "LiquidityPosition",
    "PriceDecimals",
    "TickRangeReserves",
    "adjust_price",
    "aggregate_ranges",
    "depth_profile",
    "position_liquidity",
    "price_to_tick",
    "range_reserves",
    "tick_to_price",
    # marketdata
    "AlignedPair",
    "BarSeries",
    "EventWindow",
    "SyntheticPairConfig",
    "TickSeries",
    "align_pair",
    "log_returns",
    "read_pool_events_jsonl",
    "read_trades_csv",
    "read_v3_positions_jsonl",
    "resample_last",
    "simulate_cointegrated_pair",
    "window_slice",
    # vecm
    "DET_SPECS",
    "TRACE_CRITICAL_VALUES",
    "GrangerRow",
    "JohansenResult",
    "ResidualDiagnostics",
    "VecmFit",
    "estimate_vecm",
    "granger_f_test",
    "johansen_trace",
    "residual_diagnostics",
    # discovery
    "InfoShares",
    "LrAlphaTest",
    "PTDecomposition",
    "alpha_perp",
    "gg_decompose",
    "hasbrouck_is",
    "lr_test_alpha_direction",
    # leadlag
    "LagGrid",
    "LeadLagReport",
    "default_grid",
    "hy_corr",
    "hy_corr_lagged",
    "lead_lag_profile",
    "lead_lag_ratio",
    "profile_csv",
    # arbitrage
    "ArbOpportunity",
    "ArbSummary",
    "GasFeeBreakdown",
    "GasFeeModel",
    "gas_fee",
    "opportunities_csv",
    "scan",
    "summarize",
    # cli
    "PipelineConfig",
    "Report",
    "emit_report",
    "main",
    "run_pipeline",
]
