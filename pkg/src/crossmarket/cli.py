"""Pipeline orchestration and command-line surface.

analyze ingests two trade CSVs, aligns them, runs the selected analyses in
dependency order, and emits a machine-readable report plus plot-ready CSV
side files. The remaining subcommands are thin wrappers over single
modules: simulate (synthetic pair generator), pool replay (v2 event
folding), v3 depth (range-level depth table), hy (lead-lag profile), and
arb (fee-adjusted spread scan).

Exit codes: 0 success, 1 configuration problems, 2 ingestion problems,
3 analysis failures.
"""
from __future__ import annotations

import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import click
import numpy as np

from . import __version__
from .amm_v2 import replay_events
from .amm_v3 import PriceDecimals, depth_profile
from .arbitrage import GasFeeModel, opportunities_csv, scan, summarize
from .discovery import alpha_perp, hasbrouck_is, lr_test_alpha_direction
from .errors import (
    ConfigError,
    CrossMarketError,
    EmptyInput,
    IngestError,
    NonMonotonicTimestamp,
    ParseError,
    SchemaError,
)
from .leadlag import LagGrid, default_grid, lead_lag_profile, profile_csv
from .marketdata import (
    EventWindow,
    SyntheticPairConfig,
    align_pair,
    read_pool_events_jsonl,
    read_trades_csv,
    read_v3_positions_jsonl,
    resample_last,
    simulate_cointegrated_pair,
    window_slice,
)
from .vecm import (
    DET_SPECS,
    estimate_vecm,
    granger_f_test,
    johansen_trace,
    residual_diagnostics,
)

_MARKET_ANALYSES = ("johansen", "vecm", "is", "gg", "granger", "hy", "arb")
_KNOWN_ANALYSES = _MARKET_ANALYSES + ("pool_replay", "v3_depth")
_ALIGN_POLICIES = ("intersect", "union_ffill")
_CLOCKS = ("trade_time", "tick_time")
_FORMATS = ("json", "markdown")
_SIG_LEVEL = 0.05


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the analyze pipeline needs, flat and serializable.

    A config file supplies the same keys as the command-line flags
    (underscored); explicit flags override file values.
    """

    input_a: Optional[str] = None
    input_b: Optional[str] = None
    market_a: str = "market1"
    market_b: str = "market2"
    clock_a: str = "trade_time"
    clock_b: str = "trade_time"
    window_start: Optional[int] = None
    window_end: Optional[int] = None
    interval_ms: int = 1000
    align_policy: str = "union_ffill"
    vecm_p: int = 1
    det_spec: str = "unrestricted-constant"
    level: int = 90
    granger_max_lag: int = 1
    grid: Optional[Tuple[int, ...]] = None
    gas_price_gwei: float = 98.68
    eth_usd: float = 3100.0
    gas_limit: int = 50_000
    legs: int = 2
    top_k: int = 5
    analyses: Tuple[str, ...] = _MARKET_ANALYSES
    output_path: Optional[str] = None
    output_format: str = "json"
    force_cointegration: bool = False
    pool_events: Optional[str] = None
    v3_positions: Optional[str] = None
    v3_spacing: int = 60
    v3_market_tick: Optional[int] = None
    v3_dec_x: int = 18
    v3_dec_y: int = 18

    def validate(self):
        unknown = [a for a in self.analyses if a not in _KNOWN_ANALYSES]
        if unknown:
            raise ConfigError(f"unknown analyses: {', '.join(unknown)}")
        if len(set(self.analyses)) != len(self.analyses):
            raise ConfigError("analyses must not repeat")
        if self.output_format not in _FORMATS:
            raise ConfigError(f"output format must be one of {_FORMATS}")
        if self.align_policy not in _ALIGN_POLICIES:
            raise ConfigError(f"alignment policy must be one of {_ALIGN_POLICIES}")
        if self.clock_a not in _CLOCKS or self.clock_b not in _CLOCKS:
            raise ConfigError(f"clocks must be one of {_CLOCKS}")
        if self.det_spec not in DET_SPECS:
            raise ConfigError(f"det_spec must be one of {DET_SPECS}")
        if self.level not in (90, 95, 99):
            raise ConfigError("level must be 90, 95, or 99")
        if self.interval_ms < 1:
            raise ConfigError("interval_ms must be >= 1")
        if self.vecm_p < 1:
            raise ConfigError("vecm_p must be >= 1")
        if self.granger_max_lag < 1:
            raise ConfigError("granger_max_lag must be >= 1")
        if self.top_k < 1:
            raise ConfigError("top_k must be >= 1")
        if (self.window_start is None) != (self.window_end is None):
            raise ConfigError("window_start and window_end must be set together")
        if self.window_start is not None and self.window_start >= self.window_end:
            raise ConfigError("window_start must precede window_end")
        needs_pair = [a for a in self.analyses if a in _MARKET_ANALYSES]
        if needs_pair and (self.input_a is None or self.input_b is None):
            raise ConfigError(
                f"analyses {', '.join(needs_pair)} require input_a and input_b"
            )
        if "pool_replay" in self.analyses and self.pool_events is None:
            raise ConfigError("pool_replay requires pool_events")
        if "v3_depth" in self.analyses:
            if self.v3_positions is None or self.v3_market_tick is None:
                raise ConfigError("v3_depth requires v3_positions and v3_market_tick")
            try:
                PriceDecimals(self.v3_dec_x, self.v3_dec_y)
            except ValueError as exc:
                raise ConfigError(str(exc))
            if self.v3_spacing < 1:
                raise ConfigError("v3_spacing must be >= 1")
        if self.grid is not None:
            try:
                LagGrid.from_lags(self.grid)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid lag grid: {exc}")
        try:
            GasFeeModel(
                gas_price_gwei=self.gas_price_gwei,
                eth_usd=self.eth_usd,
                gas_limit=self.gas_limit,
                legs=self.legs,
            )
        except ValueError as exc:
            raise ConfigError(str(exc))

    def gas_model(self) -> GasFeeModel:
        return GasFeeModel(
            gas_price_gwei=self.gas_price_gwei,
            eth_usd=self.eth_usd,
            gas_limit=self.gas_limit,
            legs=self.legs,
        )

    def lag_grid(self) -> LagGrid:
        if self.grid is None:
            return default_grid()
        return LagGrid.from_lags(self.grid)


@dataclass(frozen=True)
class Report:
    """Metadata plus one entry per executed analysis."""

    metadata: Dict
    blocks: Dict

    def to_dict(self) -> Dict:
        out = {"metadata": self.metadata}
        out.update(self.blocks)
        return out


def _ingest(action, *args):
    """Run a reader, folding every ingestion failure into IngestError."""
    try:
        return action(*args)
    except (OSError, ParseError, SchemaError, NonMonotonicTimestamp) as exc:
        raise IngestError(str(exc))


def _leader_verdict(share_1: float) -> str:
    if share_1 > 0.5:
        return "market1"
    if share_1 < 0.5:
        return "market2"
    return "neither"


def _gg_verdict(p_h01: float, p_h10: float) -> str:
    accept_1_leads = p_h01 > _SIG_LEVEL
    accept_2_leads = p_h10 > _SIG_LEVEL
    if accept_1_leads and not accept_2_leads:
        return "market1"
    if accept_2_leads and not accept_1_leads:
        return "market2"
    if not accept_1_leads and not accept_2_leads:
        return "neither"
    return "inconclusive"


def _hy_verdict(llr: float) -> str:
    if math.isnan(llr):
        return "inconclusive"
    if llr > 1.0:
        return "market1"
    if llr < 1.0:
        return "market2"
    return "neither"


def _side_path(output_path: str, suffix: str) -> Path:
    base = Path(output_path)
    return base.with_name(base.stem + suffix)


def run_pipeline(config: PipelineConfig) -> Report:
    """Ingest, align, run the selected analyses, and assemble the report.

    Rank selection gates the discovery blocks: with rank 0 and no
    force_cointegration, the is and gg entries carry a skipped marker
    instead of estimates that would presume cointegration.
    """
    config.validate()
    selected = set(config.analyses)
    blocks: Dict = {}
    side_files: Dict[str, str] = {}
    metadata: Dict = {
        "tool": "crossmarket",
        "version": __version__,
        "config": _config_echo(config),
    }

    aligned = None
    Y = None
    ticks_a = ticks_b = None
    if selected & set(_MARKET_ANALYSES):
        ticks_a = _ingest(read_trades_csv, config.input_a, config.market_a, config.clock_a)
        ticks_b = _ingest(read_trades_csv, config.input_b, config.market_b, config.clock_b)
        if config.window_start is not None:
            window = EventWindow(config.window_start, config.window_end)
            ticks_a = window_slice(ticks_a, window)
            ticks_b = window_slice(ticks_b, window)
        bars_a = resample_last(ticks_a, config.interval_ms)
        bars_b = resample_last(ticks_b, config.interval_ms)
        aligned = align_pair(bars_a, bars_b, config.align_policy)
        if len(aligned) == 0:
            raise EmptyInput("alignment produced no common timestamps")
        Y = np.log(aligned.matrix)
        metadata["markets"] = [config.market_a, config.market_b]
        metadata["n_ticks"] = [len(ticks_a), len(ticks_b)]
        metadata["n_aligned_bars"] = len(aligned)
        metadata["data_start_utc"] = (
            datetime.fromtimestamp(int(aligned.timestamps[0]) / 1000.0, timezone.utc)
            .date()
            .isoformat()
        )

    johansen = None
    if selected & {"johansen", "is", "gg"}:
        johansen = johansen_trace(Y, p=config.vecm_p, det_spec=config.det_spec,
                                  level=config.level)
    if "johansen" in selected:
        blocks["johansen"] = {
            "eigenvalues": list(johansen.eigenvalues),
            "trace": list(johansen.trace_stats),
            "crit": list(johansen.critical_values),
            "rank": johansen.selected_rank,
            "det_spec": johansen.det_spec,
            "level": johansen.level,
        }

    gated = (
        johansen is not None
        and johansen.selected_rank == 0
        and not config.force_cointegration
    )
    fit = None
    if "vecm" in selected or (selected & {"is", "gg"} and not gated):
        fit = estimate_vecm(Y, p=config.vecm_p, r=1, det_spec=config.det_spec)
    if "vecm" in selected:
        blocks["vecm"] = {
            "alpha": [float(v) for v in fit.alpha[:, 0]],
            "beta": [float(v) for v in fit.beta[:, 0]],
            "omega": [[float(v) for v in row] for row in fit.omega],
            "loglik": fit.loglik,
            "p": fit.lags_p,
            "det_spec": fit.det_spec,
        }
    if fit is not None:
        blocks["diagnostics"] = {
            "ljung_box": [
                {
                    "series": market,
                    "q_stat": diag.q_stat,
                    "p_value": diag.p_value,
                    "max_lag": diag.max_lag,
                }
                for market, diag in zip(
                    (config.market_a, config.market_b), residual_diagnostics(fit)
                )
            ]
        }

    skipped = {"skipped": "no cointegration"}
    if "is" in selected:
        if gated:
            blocks["is"] = dict(skipped)
        else:
            shares = hasbrouck_is(fit)
            blocks["is"] = {
                "ordering_12": list(shares.ordering_12),
                "ordering_21": list(shares.ordering_21),
                "midpoint": list(shares.midpoint),
                "verdict": _leader_verdict(shares.midpoint[0]),
            }
    if "gg" in selected:
        if gated:
            blocks["gg"] = dict(skipped)
        else:
            lr_h01 = lr_test_alpha_direction(
                Y, p=config.vecm_p, det_spec=config.det_spec, direction=(0.0, 1.0)
            )
            lr_h10 = lr_test_alpha_direction(
                Y, p=config.vecm_p, det_spec=config.det_spec, direction=(1.0, 0.0)
            )
            perp = alpha_perp(fit.alpha[:, 0])
            blocks["gg"] = {
                "alpha": [float(v) for v in fit.alpha[:, 0]],
                "alpha_perp": [float(v) for v in perp],
                "lr_h01": {"chi2": lr_h01.chi2, "p": lr_h01.p_value},
                "lr_h10": {"chi2": lr_h10.chi2, "p": lr_h10.p_value},
                "verdict": _gg_verdict(lr_h01.p_value, lr_h10.p_value),
            }

    if "granger" in selected:
        returns = np.diff(Y, axis=0)
        rows = granger_f_test(returns, max_lag=config.granger_max_lag)
        blocks["granger"] = {
            "per_lag": [
                {
                    "direction": row.direction,
                    "lag": row.lag,
                    "f_stat": row.f_stat,
                    "p_value": row.p_value,
                }
                for row in rows
            ]
        }

    if "hy" in selected:
        report = lead_lag_profile(ticks_a, ticks_b, config.lag_grid())
        profile_path = None
        if config.output_path is not None:
            path = _side_path(config.output_path, "_hy_profile.csv")
            side_files[str(path)] = profile_csv(report)
            profile_path = path.name
        blocks["hy"] = {
            "profile_path": profile_path,
            "lead_lag_ms": report.hy_lead_lag_ms,
            "max_abs_corr": report.max_abs_corr,
            "llr": report.llr,
            "clock": report.clock,
            "degenerate": report.degenerate,
            "verdict": _hy_verdict(report.llr),
        }

    if "arb" in selected:
        ops = scan(aligned, config.gas_model())
        summary = summarize(ops, k=config.top_k)
        if config.output_path is not None:
            path = _side_path(config.output_path, "_arb_rows.csv")
            side_files[str(path)] = opportunities_csv(ops)
        blocks["arb"] = {
            "top_k": [_op_dict(op) for op in summary.top],
            "mean_net": summary.mean_net_usd,
            "count_profitable": summary.count_profitable,
        }

    if "pool_replay" in selected:
        events = _ingest(read_pool_events_jsonl, config.pool_events)
        result = replay_events(events)
        final = result.snapshots[-1] if result.snapshots else None
        if config.output_path is not None:
            path = _side_path(config.output_path, "_pool_snapshots.csv")
            side_files[str(path)] = _snapshots_csv(result.snapshots)
        blocks["pool_replay"] = {
            "n_events": len(result.snapshots),
            "warnings": list(result.warnings),
            "final": None
            if final is None
            else {
                "x": final.x,
                "y": final.y,
                "lp_supply": final.lp_supply,
                "lp_burned": final.lp_burned,
                "spot_price": final.spot_price,
            },
        }

    if "v3_depth" in selected:
        positions = _ingest(read_v3_positions_jsonl, config.v3_positions)
        rows = depth_profile(
            positions,
            config.v3_spacing,
            config.v3_market_tick,
            PriceDecimals(config.v3_dec_x, config.v3_dec_y),
        )
        if config.output_path is not None:
            path = _side_path(config.output_path, "_v3_depth.csv")
            side_files[str(path)] = _depth_csv(rows)
        blocks["v3_depth"] = {"rows": [_depth_dict(row) for row in rows]}

    report = Report(metadata=metadata, blocks=blocks)
    _write_outputs(report, config, side_files)
    return report


def _config_echo(config: PipelineConfig) -> Dict:
    echo = dataclasses.asdict(config)
    for key, value in echo.items():
        if isinstance(value, tuple):
            echo[key] = list(value)
    return echo


def _op_dict(op) -> Dict:
    return {
        "timestamp": op.timestamp,
        "price_centralized": op.price_centralized,
        "price_defi": op.price_defi,
        "gross_spread_usd": op.gross_spread_usd,
        "total_fee_usd": op.total_fee_usd,
        "net_usd": op.net_usd,
        "fee_pct_of_spread": op.fee_pct_of_spread,
    }


def _snapshots_csv(snapshots) -> str:
    lines = ["event_index,x,y,lp_supply,lp_burned,spot_price"]
    lines.extend(
        f"{s.event_index},{s.x!r},{s.y!r},{s.lp_supply!r},{s.lp_burned!r},"
        f"{s.spot_price!r}"
        for s in snapshots
    )
    return "\n".join(lines) + "\n"


def _depth_dict(row) -> Dict:
    return {
        "i_lower": row.i_lower,
        "i_upper": row.i_upper,
        "price_lower": row.price_lower,
        "price_upper": row.price_upper,
        "liquidity": row.liquidity,
        "x": row.x,
        "y": row.y,
        "touch": row.is_touch,
    }


def _depth_csv(rows) -> str:
    lines = ["i_lower,i_upper,price_lower,price_upper,liquidity,x,y,touch"]
    lines.extend(
        f"{r.i_lower},{r.i_upper},{r.price_lower!r},{r.price_upper!r},"
        f"{r.liquidity!r},{r.x!r},{r.y!r},{'true' if r.is_touch else 'false'}"
        for r in rows
    )
    return "\n".join(lines) + "\n"


def emit_report(report: Report, output_format: str = "json") -> bytes:
    """Serialize deterministically; identical reports give identical bytes."""
    if output_format == "json":
        return (json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n").encode(
            "utf-8"
        )
    if output_format == "markdown":
        return _markdown_report(report).encode("utf-8")
    raise ConfigError(f"output format must be one of {_FORMATS}")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _markdown_report(report: Report) -> str:
    meta = report.metadata
    blocks = report.blocks
    lines = ["# Cross-market analysis report", ""]
    lines.append(f"- tool: {meta.get('tool')} {meta.get('version')}")
    for key in ("markets", "n_ticks", "n_aligned_bars", "data_start_utc"):
        if key in meta:
            lines.append(f"- {key}: {meta[key]}")
    date = meta.get("data_start_utc", "n/a")

    verdict_rows = []
    for name, label in (("is", "IS"), ("gg", "GG"), ("hy", "HY")):
        block = blocks.get(name)
        if block is None:
            continue
        verdict_rows.append((label, block.get("verdict", block.get("skipped", "n/a"))))
    if verdict_rows:
        lines += ["", "## Summary", "", "| date | metric | leads |", "| --- | --- | --- |"]
        lines += [f"| {date} | {label} | {verdict} |" for label, verdict in verdict_rows]

    joh = blocks.get("johansen")
    if joh is not None:
        lines += ["", "## Cointegration (trace test)", ""]
        lines.append(f"- selected rank: {joh['rank']} (level {joh['level']}%)")
        lines.append(f"- trace statistics: {[_fmt(v) for v in joh['trace']]}")
        lines.append(f"- critical values: {[_fmt(v) for v in joh['crit']]}")

    shares = blocks.get("is")
    if shares is not None and "skipped" not in shares:
        lines += [
            "",
            "## Information shares",
            "",
            "| market | share_ordering_12 | share_ordering_21 | midpoint |",
            "| --- | --- | --- | --- |",
        ]
        markets = meta.get("markets", ["market1", "market2"])
        for idx, market in enumerate(markets):
            lines.append(
                f"| {market} | {_fmt(shares['ordering_12'][idx])} "
                f"| {_fmt(shares['ordering_21'][idx])} "
                f"| {_fmt(shares['midpoint'][idx])} |"
            )
    elif shares is not None:
        lines += ["", "## Information shares", "", f"- {shares['skipped']}"]

    gg = blocks.get("gg")
    if gg is not None and "skipped" not in gg:
        lines += ["", "## Permanent-transitory (LR tests on alpha)", ""]
        lines.append(f"- alpha: {[_fmt(v) for v in gg['alpha']]}")
        lines.append(f"- alpha_perp: {[_fmt(v) for v in gg['alpha_perp']]}")
        lines.append(
            f"- H0 alpha ~ (0,1): chi2 {_fmt(gg['lr_h01']['chi2'])}, "
            f"p {_fmt(gg['lr_h01']['p'])}"
        )
        lines.append(
            f"- H0 alpha ~ (1,0): chi2 {_fmt(gg['lr_h10']['chi2'])}, "
            f"p {_fmt(gg['lr_h10']['p'])}"
        )
        lines.append(f"- verdict: {gg['verdict']}")
    elif gg is not None:
        lines += ["", "## Permanent-transitory (LR tests on alpha)", "", f"- {gg['skipped']}"]

    hy = blocks.get("hy")
    if hy is not None:
        lines += ["", "## Lead-lag (overlap-interval correlation)", ""]
        lines.append(f"- lead_lag_ms: {hy['lead_lag_ms']}")
        lines.append(f"- max |rho|: {_fmt(hy['max_abs_corr'])}")
        lines.append(f"- llr: {_fmt(hy['llr'])}")
        lines.append(f"- verdict: {hy['verdict']}")
        if hy.get("profile_path"):
            lines.append(f"- profile: {hy['profile_path']}")

    granger = blocks.get("granger")
    if granger is not None:
        lines += [
            "",
            "## Granger F-tests on returns",
            "",
            "| direction | lag | F | p |",
            "| --- | --- | --- | --- |",
        ]
        lines += [
            f"| {row['direction']} | {row['lag']} | {_fmt(row['f_stat'])} "
            f"| {_fmt(row['p_value'])} |"
            for row in granger["per_lag"]
        ]

    arb = blocks.get("arb")
    if arb is not None:
        lines += ["", "## Arbitrage potential", ""]
        lines.append(f"- mean net (USD): {_fmt(arb['mean_net'])}")
        lines.append(f"- profitable rows: {arb['count_profitable']}")
        lines += [
            "",
            "| timestamp | centralized | defi | fee | net |",
            "| --- | --- | --- | --- | --- |",
        ]
        lines += [
            f"| {op['timestamp']} | {_fmt(op['price_centralized'])} "
            f"| {_fmt(op['price_defi'])} | {_fmt(op['total_fee_usd'])} "
            f"| {_fmt(op['net_usd'])} |"
            for op in arb["top_k"]
        ]

    replay = blocks.get("pool_replay")
    if replay is not None:
        lines += ["", "## Pool replay", ""]
        lines.append(f"- events applied: {replay['n_events']}")
        if replay["final"] is not None:
            final = replay["final"]
            lines.append(
                f"- final reserves: x {_fmt(final['x'])}, y {_fmt(final['y'])}"
            )
            lines.append(f"- spot price: {_fmt(final['spot_price'])}")
        for warning in replay["warnings"]:
            lines.append(f"- warning: {warning}")

    depth = blocks.get("v3_depth")
    if depth is not None:
        lines += [
            "",
            "## Concentrated-liquidity depth",
            "",
            "| range | liquidity | x | y | touch |",
            "| --- | --- | --- | --- | --- |",
        ]
        lines += [
            f"| [{row['i_lower']}, {row['i_upper']}) | {_fmt(row['liquidity'])} "
            f"| {_fmt(row['x'])} | {_fmt(row['y'])} | {row['touch']} |"
            for row in depth["rows"]
        ]

    diagnostics = blocks.get("diagnostics")
    if diagnostics is not None:
        lines += ["", "## Residual diagnostics (Ljung-Box)", ""]
        lines += [
            f"- {entry['series']}: Q {_fmt(entry['q_stat'])}, "
            f"p {_fmt(entry['p_value'])} (max_lag {entry['max_lag']})"
            for entry in diagnostics["ljung_box"]
        ]

    return "\n".join(lines) + "\n"


def _write_outputs(report: Report, config: PipelineConfig, side_files: Dict[str, str]):
    payload = emit_report(report, config.output_format)
    if config.output_path is None:
        click.get_text_stream("stdout").write(payload.decode("utf-8"))
    else:
        Path(config.output_path).write_bytes(payload)
        for path, content in side_files.items():
            Path(path).write_text(content, encoding="utf-8")


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_int_list(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise ConfigError(f"not a comma-separated integer list: {text!r}")


def _parse_str_list(text: str) -> Tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip() != "")


def _parse_float_pair(text: str) -> Tuple[float, float]:
    parts = [part for part in text.split(",") if part.strip() != ""]
    if len(parts) != 2:
        raise ConfigError(f"expected two comma-separated numbers: {text!r}")
    return float(parts[0]), float(parts[1])


_FILE_PARSERS = {
    str: lambda text: text,
    int: int,
    float: float,
    bool: _parse_bool,
}


def load_config_file(path) -> Dict[str, str]:
    """key = value lines, UTF-8; blank lines and #-comments ignored."""
    try:
        text = Path(path).read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}")
    values: Dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {line_no}: expected key = value")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


_CONFIG_FIELD_TYPES = {
    "input_a": str, "input_b": str, "market_a": str, "market_b": str,
    "clock_a": str, "clock_b": str, "window_start": int, "window_end": int,
    "interval_ms": int, "align_policy": str, "vecm_p": int, "det_spec": str,
    "level": int, "granger_max_lag": int, "gas_price_gwei": float,
    "eth_usd": float, "gas_limit": int, "legs": int, "top_k": int,
    "output_path": str, "output_format": str, "force_cointegration": bool,
    "pool_events": str, "v3_positions": str, "v3_spacing": int,
    "v3_market_tick": int, "v3_dec_x": int, "v3_dec_y": int,
}


def build_config(cli_values: Dict, sources: Dict[str, bool], file_values: Dict[str, str]) -> PipelineConfig:
    """Merge config-file values under explicitly passed flags.

    cli_values holds every flag's parsed value; sources marks which came
    from the command line rather than a default.
    """
    merged = dict(cli_values)
    for key, raw in file_values.items():
        if key in ("analyses",):
            if not sources.get("analyses", False):
                merged["analyses"] = _parse_str_list(raw)
            continue
        if key == "grid":
            if not sources.get("grid", False):
                merged["grid"] = _parse_int_list(raw)
            continue
        if key not in _CONFIG_FIELD_TYPES:
            raise ConfigError(f"unknown config key: {key}")
        if sources.get(key, False):
            continue
        parser = _FILE_PARSERS[_CONFIG_FIELD_TYPES[key]]
        try:
            merged[key] = parser(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"bad value for {key}: {raw!r}")
    return PipelineConfig(**merged)


@click.group(name="crossmarket")
@click.version_option(version=__version__, prog_name="crossmarket")
def cli():
    """Cross-market price discovery and AMM pool toolkit."""


def _from_cli(ctx: click.Context, name: str) -> bool:
    source = ctx.get_parameter_source(name)
    return source is not None and source.name == "COMMANDLINE"


@cli.command()
@click.option("--config", "config_path", default=None, help="key = value file; flags override it.")
@click.option("--input-a", default=None, help="Trades CSV for the first (centralized) market.")
@click.option("--input-b", default=None, help="Trades CSV for the second (decentralized) market.")
@click.option("--market-a", default="market1", show_default=True)
@click.option("--market-b", default="market2", show_default=True)
@click.option("--clock-a", type=click.Choice(_CLOCKS), default="trade_time", show_default=True)
@click.option("--clock-b", type=click.Choice(_CLOCKS), default="trade_time", show_default=True)
@click.option("--window-start", type=int, default=None, help="Window start (epoch ms, inclusive).")
@click.option("--window-end", type=int, default=None, help="Window end (epoch ms, exclusive).")
@click.option("--interval-ms", type=int, default=1000, show_default=True)
@click.option("--align-policy", type=click.Choice(_ALIGN_POLICIES), default="union_ffill", show_default=True)
@click.option("--vecm-p", type=int, default=1, show_default=True, help="VECM lag order.")
@click.option("--det-spec", type=click.Choice(DET_SPECS), default="unrestricted-constant", show_default=True)
@click.option("--level", type=int, default=90, show_default=True, help="Trace-test level (90/95/99).")
@click.option("--granger-max-lag", type=int, default=1, show_default=True)
@click.option("--grid", default=None, callback=lambda ctx, param, v: _parse_int_list(v) if v is not None else None,
              help="Comma-separated lag grid in ms (default: built-in grid).")
@click.option("--gas-price-gwei", type=float, default=98.68, show_default=True)
@click.option("--eth-usd", type=float, default=3100.0, show_default=True)
@click.option("--gas-limit", type=int, default=50_000, show_default=True)
@click.option("--legs", type=int, default=2, show_default=True)
@click.option("--top-k", type=int, default=5, show_default=True)
@click.option("--analyses", default=",".join(_MARKET_ANALYSES), show_default=True,
              callback=lambda ctx, param, v: _parse_str_list(v))
@click.option("--output", "output_path", default=None, help="Report path (default: stdout).")
@click.option("--format", "output_format", type=click.Choice(_FORMATS), default="json", show_default=True)
@click.option("--force-cointegration", is_flag=True, default=False)
@click.option("--pool-events", default=None, help="Pool events JSONL for pool_replay.")
@click.option("--v3-positions", default=None, help="Positions JSONL for v3_depth.")
@click.option("--v3-spacing", type=int, default=60, show_default=True)
@click.option("--v3-market-tick", type=int, default=None)
@click.option("--v3-dec-x", type=int, default=18, show_default=True)
@click.option("--v3-dec-y", type=int, default=18, show_default=True)
@click.pass_context
def analyze(ctx, config_path, **kwargs):
    """Run the full pipeline on two trade CSVs and emit a report."""
    file_values = load_config_file(config_path) if config_path else {}
    sources = {name: _from_cli(ctx, name) for name in kwargs}
    config = build_config(kwargs, sources, file_values)
    run_pipeline(config)


@cli.command()
@click.option("--n", type=int, default=2000, show_default=True)
@click.option("--alpha", default="0.0,0.1", show_default=True, help="Adjustment pair a1,a2.")
@click.option("--beta", default="1.0,-1.0", show_default=True, help="Cointegrating pair b1,b2.")
@click.option("--noise-sd", default="1.0,1.0", show_default=True)
@click.option("--rho", type=float, default=0.0, show_default=True)
@click.option("--leader-lag-ms", type=int, default=0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-a", required=True, help="Output CSV for market 1.")
@click.option("--out-b", required=True, help="Output CSV for market 2.")
def simulate(n, alpha, beta, noise_sd, rho, leader_lag_ms, seed, out_a, out_b):
    """Generate a synthetic pair and write two trades CSVs."""
    try:
        cfg = SyntheticPairConfig(
            n=n,
            alpha=_parse_float_pair(alpha),
            beta=_parse_float_pair(beta),
            noise_sd=_parse_float_pair(noise_sd),
            rho=rho,
            leader_lag_ms=leader_lag_ms,
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    series_a, series_b = simulate_cointegrated_pair(cfg)
    for path, series in ((out_a, series_a), (out_b, series_b)):
        lines = ["timestamp_ms,price"]
        lines.extend(
            f"{ts},{price!r}"
            for ts, price in zip(series.timestamps.tolist(), series.prices.tolist())
        )
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@cli.group()
def pool():
    """Uniswap v2 pool-state tools."""


@pool.command("replay")
@click.option("--events", "events_path", required=True, help="Pool events JSONL.")
@click.option("--fee", type=float, default=0.003, show_default=True)
@click.option("--output", "output_path", default=None, help="Snapshots CSV (default: stdout).")
def pool_replay(events_path, fee, output_path):
    """Fold a pool event log into per-event snapshots."""
    events = _ingest(read_pool_events_jsonl, events_path)
    result = replay_events(events, fee=fee)
    for warning in result.warnings:
        click.echo(f"warning: {warning}", err=True)
    text = _snapshots_csv(result.snapshots)
    if output_path is None:
        click.get_text_stream("stdout").write(text)
    else:
        Path(output_path).write_text(text, encoding="utf-8")


@cli.group()
def v3():
    """Uniswap v3 concentrated-liquidity tools."""


@v3.command("depth")
@click.option("--positions", "positions_path", required=True, help="Positions JSONL.")
@click.option("--spacing", type=int, default=60, show_default=True)
@click.option("--market-tick", type=int, required=True)
@click.option("--dec-x", type=int, default=18, show_default=True)
@click.option("--dec-y", type=int, default=18, show_default=True)
@click.option("--output", "output_path", default=None, help="Depth CSV (default: stdout).")
def v3_depth(positions_path, spacing, market_tick, dec_x, dec_y, output_path):
    """Aggregate positions into an order-book-style depth table."""
    positions = _ingest(read_v3_positions_jsonl, positions_path)
    try:
        decimals = PriceDecimals(dec_x, dec_y)
    except ValueError as exc:
        raise ConfigError(str(exc))
    rows = depth_profile(positions, spacing, market_tick, decimals)
    text = _depth_csv(rows)
    if output_path is None:
        click.get_text_stream("stdout").write(text)
    else:
        Path(output_path).write_text(text, encoding="utf-8")


@cli.command()
@click.option("--input-a", required=True)
@click.option("--input-b", required=True)
@click.option("--market-a", default="market1", show_default=True)
@click.option("--market-b", default="market2", show_default=True)
@click.option("--clock-a", type=click.Choice(_CLOCKS), default="trade_time", show_default=True)
@click.option("--clock-b", type=click.Choice(_CLOCKS), default="trade_time", show_default=True)
@click.option("--grid", default=None, callback=lambda ctx, param, v: _parse_int_list(v) if v is not None else None)
@click.option("--profile-out", default=None, help="Write the lag profile CSV here.")
@click.option("--output", "output_path", default=None, help="JSON block (default: stdout).")
def hy(input_a, input_b, market_a, market_b, clock_a, clock_b, grid, profile_out, output_path):
    """Lead-lag profile between two tick series."""
    ticks_a = _ingest(read_trades_csv, input_a, market_a, clock_a)
    ticks_b = _ingest(read_trades_csv, input_b, market_b, clock_b)
    try:
        lag_grid = default_grid() if grid is None else LagGrid.from_lags(grid)
    except ValueError as exc:
        raise ConfigError(f"invalid lag grid: {exc}")
    report = lead_lag_profile(ticks_a, ticks_b, lag_grid)
    if profile_out is not None:
        Path(profile_out).write_text(profile_csv(report), encoding="utf-8")
    block = {
        "profile_path": None if profile_out is None else Path(profile_out).name,
        "lead_lag_ms": report.hy_lead_lag_ms,
        "max_abs_corr": report.max_abs_corr,
        "llr": report.llr,
        "clock": report.clock,
        "degenerate": report.degenerate,
        "verdict": _hy_verdict(report.llr),
    }
    payload = json.dumps(block, sort_keys=True, indent=2) + "\n"
    if output_path is None:
        click.get_text_stream("stdout").write(payload)
    else:
        Path(output_path).write_text(payload, encoding="utf-8")


@cli.command()
@click.option("--input-a", required=True, help="Centralized trades CSV.")
@click.option("--input-b", required=True, help="Decentralized trades CSV.")
@click.option("--interval-ms", type=int, default=1000, show_default=True)
@click.option("--align-policy", type=click.Choice(_ALIGN_POLICIES), default="union_ffill", show_default=True)
@click.option("--gas-price-gwei", type=float, default=98.68, show_default=True)
@click.option("--eth-usd", type=float, default=3100.0, show_default=True)
@click.option("--gas-limit", type=int, default=50_000, show_default=True)
@click.option("--legs", type=int, default=2, show_default=True)
@click.option("--top-k", type=int, default=5, show_default=True)
@click.option("--rows-out", default=None, help="Write per-row scan CSV here.")
@click.option("--output", "output_path", default=None, help="JSON summary (default: stdout).")
def arb(input_a, input_b, interval_ms, align_policy, gas_price_gwei, eth_usd,
        gas_limit, legs, top_k, rows_out, output_path):
    """Fee-adjusted arbitrage scan over an aligned price pair."""
    ticks_a = _ingest(read_trades_csv, input_a, "centralized", "trade_time")
    ticks_b = _ingest(read_trades_csv, input_b, "defi", "trade_time")
    if interval_ms < 1:
        raise ConfigError("interval_ms must be >= 1")
    if top_k < 1:
        raise ConfigError("top_k must be >= 1")
    try:
        model = GasFeeModel(
            gas_price_gwei=gas_price_gwei,
            eth_usd=eth_usd,
            gas_limit=gas_limit,
            legs=legs,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    aligned = align_pair(
        resample_last(ticks_a, interval_ms),
        resample_last(ticks_b, interval_ms),
        align_policy,
    )
    ops = scan(aligned, model)
    summary = summarize(ops, k=top_k)
    if rows_out is not None:
        Path(rows_out).write_text(opportunities_csv(ops), encoding="utf-8")
    block = {
        "top_k": [_op_dict(op) for op in summary.top],
        "mean_net": summary.mean_net_usd,
        "count_profitable": summary.count_profitable,
    }
    payload = json.dumps(block, sort_keys=True, indent=2) + "\n"
    if output_path is None:
        click.get_text_stream("stdout").write(payload)
    else:
        Path(output_path).write_text(payload, encoding="utf-8")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point with the stable exit-code contract."""
    try:
        cli.main(args=argv, prog_name="crossmarket", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return 1
    except IngestError as exc:
        click.echo(f"ingest error: {exc}", err=True)
        return 2
    except CrossMarketError as exc:
        click.echo(f"analysis error: {exc}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
