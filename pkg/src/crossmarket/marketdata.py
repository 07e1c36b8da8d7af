"""Market data model: asynchronous ticks, regular bars, ingestion, alignment,
and a synthetic cointegrated-pair generator used as a test oracle.

Timestamps are integer epoch milliseconds throughout. Series hold read-only
numpy arrays; construction validates ordering and positivity once so the
estimators can assume clean input.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np

from .amm_v2 import PoolEvent
from .amm_v3 import LiquidityPosition
from .errors import (
    EmptyInput,
    IntervalMismatch,
    NonMonotonicTimestamp,
    ParseError,
    SchemaError,
    UnstableConfig,
)

_CLOCKS = ("trade_time", "tick_time")


def _as_time_array(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError("timestamps must be one-dimensional")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.isfinite(arr)) or not np.all(arr == np.floor(arr)):
            raise ValueError("timestamps must be integer milliseconds")
    out = arr.astype(np.int64)
    out.flags.writeable = False
    return out


def _as_price_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("prices must be one-dimensional")
    if arr.size and not np.all(arr > 0):
        raise ValueError("prices must be positive")
    out = arr.copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class TickSeries:
    """Irregularly spaced observations of one market."""

    market_id: str
    timestamps: np.ndarray
    prices: np.ndarray
    clock: str = "trade_time"

    def __post_init__(self):
        ts = _as_time_array(self.timestamps)
        px = _as_price_array(self.prices)
        if ts.shape != px.shape:
            raise ValueError("timestamps and prices must have equal length")
        if ts.size > 1 and not np.all(np.diff(ts) > 0):
            raise ValueError("timestamps must be strictly increasing")
        if self.clock not in _CLOCKS:
            raise ValueError(f"clock must be one of {_CLOCKS}")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "prices", px)

    def __len__(self) -> int:
        return int(self.timestamps.size)

    @property
    def observations(self) -> List[Tuple[int, float]]:
        return list(zip(self.timestamps.tolist(), self.prices.tolist()))


@dataclass(frozen=True, eq=False)
class BarSeries:
    """Prices on a regular grid with a fixed interval.

    Timestamps advance by positive multiples of interval_ms: a fully
    populated series steps by exactly the interval, while a market quiet on
    some bars may skip grid points (alignment forward-fills those).
    """

    market_id: str
    interval_ms: int
    timestamps: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        if self.interval_ms <= 0:
            raise ValueError("interval_ms must be positive")
        ts = _as_time_array(self.timestamps)
        px = _as_price_array(self.prices)
        if ts.shape != px.shape:
            raise ValueError("timestamps and prices must have equal length")
        if ts.size > 1:
            gaps = np.diff(ts)
            if not np.all((gaps > 0) & (gaps % self.interval_ms == 0)):
                raise ValueError("bar timestamps must step by multiples of interval_ms")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "prices", px)

    def __len__(self) -> int:
        return int(self.timestamps.size)

    @property
    def observations(self) -> List[Tuple[int, float]]:
        return list(zip(self.timestamps.tolist(), self.prices.tolist()))


@dataclass(frozen=True)
class EventWindow:
    """Half-open time window [start, end) used to slice series around events."""

    start: int
    end: int
    label: str = ""

    def __post_init__(self):
        if self.start >= self.end:
            raise ValueError("window start must precede end")


Series = Union[TickSeries, BarSeries]


def window_slice(series: Series, window: EventWindow) -> Series:
    """Restrict a series to observations with start <= t < end."""
    ts = series.timestamps
    lo = int(np.searchsorted(ts, window.start, side="left"))
    hi = int(np.searchsorted(ts, window.end, side="left"))
    if isinstance(series, BarSeries):
        return BarSeries(series.market_id, series.interval_ms, ts[lo:hi], series.prices[lo:hi])
    return TickSeries(series.market_id, ts[lo:hi], series.prices[lo:hi], series.clock)


def read_trades_csv(path, market_id: str = "", clock: str = "trade_time") -> TickSeries:
    """Parse a `timestamp_ms,price[,size]` CSV into a TickSeries.

    Rows sharing a timestamp collapse to the last one; a timestamp strictly
    below its predecessor is an error. Sizes are validated and discarded.
    """
    with open(path, "r", encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(1, "missing header")
        if header not in (["timestamp_ms", "price"], ["timestamp_ms", "price", "size"]):
            raise ParseError(1, f"unexpected header {header!r}")
        width = len(header)
        times: List[int] = []
        prices: List[float] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise ParseError(line_no, f"expected {width} fields, got {len(row)}")
            try:
                ts = int(row[0])
                price = float(row[1])
                if width == 3:
                    float(row[2])
            except ValueError as exc:
                raise ParseError(line_no, str(exc))
            if not math.isfinite(price) or price <= 0:
                raise ParseError(line_no, f"price must be positive, got {row[1]}")
            if times and ts == times[-1]:
                prices[-1] = price
                continue
            if times and ts < times[-1]:
                raise NonMonotonicTimestamp(line_no)
            times.append(ts)
            prices.append(price)
    name = market_id or str(path)
    return TickSeries(name, np.array(times, dtype=np.int64), np.array(prices), clock)


_EVENT_AMOUNT_KEYS = {
    "mint": "amounts_added",
    "burn": "amounts_removed",
    "trade": "amounts_swapped",
}


def _event_kind(record: dict, line_no: int) -> str:
    kind = record.get("event_type")
    if kind is not None:
        if kind == "swap":
            return "trade"
        if kind in _EVENT_AMOUNT_KEYS:
            return kind
        raise SchemaError(line_no, "event_type")
    for kind, key in _EVENT_AMOUNT_KEYS.items():
        if key in record:
            return kind
    raise SchemaError(line_no, "event_type")


def read_pool_events_jsonl(path) -> List[PoolEvent]:
    """Parse pool events (one JSON object per line) into PoolEvent records.

    Field names follow the on-chain export convention: amounts live under
    amounts_added / amounts_removed / amounts_swapped as {tokenA, tokenB}.
    Records missing event_type are classified by which amounts key they
    carry. Output is ordered by (block_number, file order).
    """
    events: List[Tuple[int, int, PoolEvent]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(line_no, str(exc))
            if not isinstance(record, dict):
                raise SchemaError(line_no, "object")
            kind = _event_kind(record, line_no)
            key = _EVENT_AMOUNT_KEYS[kind]
            amounts = record.get(key)
            if not isinstance(amounts, dict):
                raise SchemaError(line_no, key)
            if "tokenA" not in amounts or "tokenB" not in amounts:
                raise SchemaError(line_no, f"{key}.tokenA/tokenB")
            try:
                event = PoolEvent(
                    kind=kind,
                    ax=amounts["tokenA"],
                    ay=amounts["tokenB"],
                    block_number=int(record.get("block_number", 0)),
                    timestamp=int(record.get("timestamp", 0)),
                    pool_address=str(record.get("pool_address", "")),
                    provider_address=str(record.get("provider_address", "")),
                )
            except (TypeError, ValueError):
                raise SchemaError(line_no, key)
            events.append((event.block_number, line_no, event))
    events.sort(key=lambda item: item[0])
    return [event for _, _, event in events]


def read_v3_positions_jsonl(path) -> List[LiquidityPosition]:
    """Parse concentrated-liquidity positions, one JSON object per line.

    Schema: {"kind": "v3_position", "i_lower": int, "i_upper": int,
    "L_pos": number}.
    """
    positions: List[LiquidityPosition] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(line_no, str(exc))
            if not isinstance(record, dict) or record.get("kind") != "v3_position":
                raise SchemaError(line_no, "kind")
            for fld in ("i_lower", "i_upper", "L_pos"):
                if fld not in record:
                    raise SchemaError(line_no, fld)
            try:
                positions.append(
                    LiquidityPosition(
                        i_lower=int(record["i_lower"]),
                        i_upper=int(record["i_upper"]),
                        liquidity=float(record["L_pos"]),
                    )
                )
            except (TypeError, ValueError):
                raise SchemaError(line_no, "i_lower")
    return positions


def resample_last(ticks: Series, interval_ms: int) -> BarSeries:
    """Forward-fill ticks onto a regular grid (last price at or before each
    bar timestamp). The grid spans the tick range only, so no bar precedes
    the first tick or follows the last. Resampling a BarSeries at its own
    interval is the identity.
    """
    if interval_ms <= 0:
        raise ValueError("interval_ms must be positive")
    if len(ticks) == 0:
        raise EmptyInput("cannot resample an empty series")
    if isinstance(ticks, BarSeries) and ticks.interval_ms == interval_ms:
        return ticks
    ts = ticks.timestamps
    step = int(interval_ms)
    start = -(-int(ts[0]) // step) * step
    stop = (int(ts[-1]) // step) * step
    if start > stop:
        grid = np.array([], dtype=np.int64)
    else:
        grid = np.arange(start, stop + 1, step, dtype=np.int64)
    idx = np.searchsorted(ts, grid, side="right") - 1
    return BarSeries(ticks.market_id, step, grid, ticks.prices[idx])


@dataclass(frozen=True, eq=False)
class AlignedPair:
    """Two bar series joined onto one timestamp grid."""

    market_ids: Tuple[str, str]
    timestamps: np.ndarray
    price_a: np.ndarray
    price_b: np.ndarray

    def __post_init__(self):
        ts = _as_time_array(self.timestamps)
        pa = _as_price_array(self.price_a)
        pb = _as_price_array(self.price_b)
        if not (ts.shape == pa.shape == pb.shape):
            raise ValueError("aligned columns must have equal length")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "price_a", pa)
        object.__setattr__(self, "price_b", pb)

    def __len__(self) -> int:
        return int(self.timestamps.size)

    @property
    def matrix(self) -> np.ndarray:
        """T x 2 price matrix (column order a, b)."""
        return np.column_stack([self.price_a, self.price_b])


def align_pair(a: BarSeries, b: BarSeries, policy: str = "union_ffill") -> AlignedPair:
    """Join two equal-interval bar series onto one grid.

    intersect keeps timestamps present in both series; union_ffill takes the
    union grid, forward-fills each side, and drops leading rows where either
    side has no history yet.
    """
    if a.interval_ms != b.interval_ms:
        raise IntervalMismatch(
            f"intervals differ: {a.interval_ms} vs {b.interval_ms}"
        )
    if policy == "intersect":
        grid = np.intersect1d(a.timestamps, b.timestamps)
    elif policy == "union_ffill":
        grid = np.union1d(a.timestamps, b.timestamps)
    else:
        raise ValueError("policy must be 'intersect' or 'union_ffill'")
    idx_a = np.searchsorted(a.timestamps, grid, side="right") - 1
    idx_b = np.searchsorted(b.timestamps, grid, side="right") - 1
    defined = (idx_a >= 0) & (idx_b >= 0)
    grid = grid[defined]
    idx_a = idx_a[defined]
    idx_b = idx_b[defined]
    return AlignedPair(
        (a.market_id, b.market_id), grid, a.prices[idx_a], b.prices[idx_b]
    )


def log_returns(bars: Series) -> List[Tuple[int, float]]:
    """Log-price increments r_t = ln p_t - ln p_{t-1}, stamped at t."""
    if len(bars) < 2:
        raise EmptyInput("need at least two observations for returns")
    r = np.diff(np.log(bars.prices))
    return list(zip(bars.timestamps[1:].tolist(), r.tolist()))


@dataclass(frozen=True)
class SyntheticPairConfig:
    """Parameters of the synthetic cointegrated pair generator."""

    n: int
    alpha: Tuple[float, float]
    beta: Tuple[float, float] = (1.0, -1.0)
    noise_sd: Tuple[float, float] = (1.0, 1.0)
    rho: float = 0.0
    leader_lag_ms: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if len(self.alpha) != 2 or len(self.beta) != 2 or len(self.noise_sd) != 2:
            raise ValueError("alpha, beta and noise_sd must be pairs")
        if not all(s > 0 for s in self.noise_sd):
            raise ValueError("noise_sd entries must be positive")
        if not -1 < self.rho < 1:
            raise ValueError("rho must lie in (-1, 1)")
        if self.leader_lag_ms < 0:
            raise ValueError("leader_lag_ms must be non-negative")


_BURN_IN = 500
_SPREAD_LIMIT = 1e6
_BASE_LOG_PRICE = math.log(100.0)


def _innovation_chol(noise_sd: Tuple[float, float], rho: float) -> np.ndarray:
    s1, s2 = noise_sd
    return np.array([[s1, 0.0], [rho * s2, s2 * math.sqrt(1.0 - rho * rho)]])


def simulate_cointegrated_pair(cfg: SyntheticPairConfig) -> Tuple[TickSeries, TickSeries]:
    """Generate a deterministic synthetic pair for estimator oracles.

    Default mode iterates the error-correction system on log prices: each
    market's increment loads on the lagged cointegration spread beta'X, with
    jointly Gaussian innovations of the configured sds and correlation. A
    500-step burn-in is discarded; timestamps are 1000 ms bars.

    With leader_lag_ms > 0 the pair is instead a pure leader-follower: both
    markets observe one Brownian log price at independent Poisson-like
    arrival times, market 2 delayed by the lag and perturbed by observation
    noise. Irregular arrivals let sub-interval lags be resolved.
    """
    rng = np.random.default_rng(cfg.seed)
    if cfg.leader_lag_ms > 0:
        return _simulate_pure_leader(cfg, rng)
    total = cfg.n + _BURN_IN
    chol = _innovation_chol(cfg.noise_sd, cfg.rho)
    eps = rng.standard_normal((total, 2)) @ chol.T
    a1, a2 = cfg.alpha
    b1, b2 = cfg.beta
    log_p = np.empty((total, 2))
    x1 = x2 = _BASE_LOG_PRICE
    for t in range(total):
        spread = b1 * x1 + b2 * x2
        if abs(spread) > _SPREAD_LIMIT:
            raise UnstableConfig(
                f"spread diverged (|{spread:.3g}| > {_SPREAD_LIMIT:.0e}) at step {t}"
            )
        x1 += a1 * spread + eps[t, 0]
        x2 += a2 * spread + eps[t, 1]
        log_p[t, 0] = x1
        log_p[t, 1] = x2
    kept = log_p[_BURN_IN:]
    times = 1000 * np.arange(cfg.n, dtype=np.int64)
    return (
        TickSeries("market1", times, np.exp(kept[:, 0])),
        TickSeries("market2", times, np.exp(kept[:, 1])),
    )


def _simulate_pure_leader(
    cfg: SyntheticPairConfig, rng: np.random.Generator
) -> Tuple[TickSeries, TickSeries]:
    # Integer-ms exponential gaps (floor 1) keep timestamps strictly
    # increasing while staying off any fixed grid. The mean gap is tied to
    # the configured delay: resolving a lead of d ms requires sampling
    # substantially denser than d, and argmax scatter grows with gap size.
    mean_gap = max(1.0, cfg.leader_lag_ms / 2.0)
    gaps1 = np.maximum(1, np.rint(rng.exponential(mean_gap, cfg.n))).astype(np.int64)
    gaps2 = np.maximum(1, np.rint(rng.exponential(mean_gap, cfg.n))).astype(np.int64)
    t1 = np.cumsum(gaps1)
    t2 = np.cumsum(gaps2)
    shifted = t2 - cfg.leader_lag_ms
    support = np.unique(np.concatenate([t1, shifted]))
    # Exact Brownian increments between consecutive support points, variance
    # proportional to elapsed time with noise_sd[0] per 1000 ms.
    dt = np.diff(support, prepend=support[0])
    steps = rng.standard_normal(support.size) * cfg.noise_sd[0] * np.sqrt(dt / 1000.0)
    steps[0] = 0.0
    walk = np.cumsum(steps)
    level = {int(t): w for t, w in zip(support.tolist(), walk.tolist())}
    w1 = np.array([level[int(t)] for t in t1])
    w2 = np.array([level[int(t)] for t in shifted])
    obs_noise = rng.standard_normal(cfg.n) * cfg.noise_sd[1]
    return (
        TickSeries("market1", t1, np.exp(_BASE_LOG_PRICE + w1)),
        TickSeries("market2", t2, np.exp(_BASE_LOG_PRICE + w2 + obs_noise)),
    )
