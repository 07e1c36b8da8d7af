"""Constant-product pool math and the event-driven snapshot state machine.

Reserves follow the product rule k = x * y with a fee charged on the input
side of each trade. All operations are pure: they return new snapshots and
never mutate their arguments. Arithmetic runs in floats unless every numeric
input is an integer, in which case square roots and pro-rata splits use exact
integer arithmetic (raw on-chain amounts exceed 64 bits, so this matters for
LP-token bookkeeping).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .errors import (
    BurnExceedsSupply,
    EmptyPool,
    InsufficientInitialLiquidity,
    InvariantViolation,
    NonPositiveInput,
    NoSolution,
    OutputExceedsReserve,
)

MINIMUM_LIQUIDITY = 1000

# Relative tolerance when validating trade events from logs.
INVARIANT_RTOL = 1e-9

_DEFAULT_FEE = 0.003


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _all_int(*vals) -> bool:
    return all(_is_int(v) for v in vals)


@dataclass(frozen=True)
class PoolSnapshotV2:
    """Pool state at one point in the event stream.

    lp_supply counts outstanding LP tokens; lp_burned counts tokens
    permanently locked at pool creation. Pro-rata math uses their sum,
    which is the total ever minted.
    """

    x: float
    y: float
    lp_supply: float
    lp_burned: float = 0
    fee: float = _DEFAULT_FEE
    event_index: int = 0

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise ValueError("reserves must be non-negative")
        if self.lp_supply < 0 or self.lp_burned < 0:
            raise ValueError("LP token amounts must be non-negative")
        if not (0 <= self.fee < 1):
            raise ValueError("fee must lie in [0, 1)")
        if self.lp_supply + self.lp_burned > 0 and (self.x == 0 or self.y == 0):
            raise ValueError("pool with outstanding LP tokens must hold both reserves")

    @property
    def lp_total(self):
        return self.lp_supply + self.lp_burned

    @property
    def spot_price(self) -> float:
        """Marginal price y per x."""
        if self.x == 0:
            raise EmptyPool("spot price undefined on empty pool")
        return self.y / self.x


@dataclass(frozen=True)
class PoolEvent:
    """One mint, burn, or trade from an event log.

    Trade flows are signed (positive into the pool). Mint and burn amounts
    are positive magnitudes; the direction is implied by the kind. A burn may
    carry either the LP amount, the withdrawal amounts, or both (logs often
    record only the token amounts removed).
    """

    kind: str
    ax: Optional[float] = None
    ay: Optional[float] = None
    lp_amount: float = 0
    block_number: int = 0
    timestamp: int = 0
    pool_address: str = ""
    provider_address: str = ""

    def __post_init__(self):
        if self.kind not in ("mint", "burn", "trade"):
            raise ValueError(f"unknown event kind: {self.kind!r}")
        if self.kind == "mint":
            if self.ax is None or self.ay is None or self.ax <= 0 or self.ay <= 0:
                raise ValueError("mint requires positive amounts on both sides")
        elif self.kind == "burn":
            has_amounts = self.ax is not None and self.ay is not None and self.ax > 0 and self.ay > 0
            if self.lp_amount <= 0 and not has_amounts:
                raise ValueError("burn requires lp_amount or removal amounts")
        else:
            flows = [v for v in (self.ax, self.ay) if v is not None]
            if not flows or all(v == 0 for v in flows):
                raise ValueError("trade requires at least one nonzero flow")


@dataclass(frozen=True)
class SwapQuote:
    """Quoted outcome of a single swap against fixed reserves.

    Prices quoted as y per x. realized_price is what the trader actually
    paid per unit received, gross of fees; slippage compares it with the
    pre-trade marginal cost of x in y units.
    """

    input_gross: float
    input_effective: float
    output: float
    spot_price_before: float
    spot_price_after: float
    realized_price: float
    slippage_fraction: float


def _quote(pool: PoolSnapshotV2, dx_gross: float, dx_eff: float, dy: float) -> SwapQuote:
    x, y = pool.x, pool.y
    x_after = x + dx_eff
    y_after = y - dy
    realized = dx_gross / dy
    # realized is x per unit y, so compare against the x-per-y spot cost x/y.
    slippage = realized / (x / y) - 1.0
    return SwapQuote(
        input_gross=dx_gross,
        input_effective=dx_eff,
        output=dy,
        spot_price_before=y / x,
        spot_price_after=y_after / x_after,
        realized_price=realized,
        slippage_fraction=slippage,
    )


def swap_exact_in(pool: PoolSnapshotV2, dx: float) -> SwapQuote:
    """Quote the y received for paying dx of token x.

    The fee stays in the pool: only dx * (1 - fee) moves the price, so
    output = y - k / (x + dx * (1 - fee)).
    """
    if dx <= 0:
        raise NonPositiveInput("trade input must be positive")
    if pool.x <= 0 or pool.y <= 0:
        raise EmptyPool("cannot swap against empty reserves")
    dx_eff = dx * (1.0 - pool.fee)
    k = pool.x * pool.y
    dy = pool.y - k / (pool.x + dx_eff)
    return _quote(pool, dx, dx_eff, dy)


def input_for_exact_out(pool: PoolSnapshotV2, dy_target: float) -> SwapQuote:
    """Quote the x required to receive exactly dy_target of token y."""
    if dy_target <= 0:
        raise NonPositiveInput("requested output must be positive")
    if pool.x <= 0 or pool.y <= 0:
        raise EmptyPool("cannot swap against empty reserves")
    if dy_target >= pool.y:
        raise OutputExceedsReserve(f"requested {dy_target} of reserve {pool.y}")
    k = pool.x * pool.y
    dx_eff = k / (pool.y - dy_target) - pool.x
    dx_gross = dx_eff / (1.0 - pool.fee)
    return _quote(pool, dx_gross, dx_eff, dy_target)


def init_snapshot(x0, y0, min_liquidity_burn=MINIMUM_LIQUIDITY, fee: float = _DEFAULT_FEE) -> PoolSnapshotV2:
    """Create a pool from its first deposit.

    Total LP tokens minted equal sqrt(x0 * y0); min_liquidity_burn of them
    are locked forever. With all-integer inputs the root is floor(isqrt),
    exact at any magnitude.
    """
    if x0 <= 0 or y0 <= 0:
        raise NonPositiveInput("initial deposit must be positive on both sides")
    if min_liquidity_burn < 0:
        raise NonPositiveInput("liquidity burn cannot be negative")
    if _all_int(x0, y0, min_liquidity_burn):
        total = math.isqrt(x0 * y0)
    else:
        total = math.sqrt(x0 * y0)
    if total <= min_liquidity_burn:
        raise InsufficientInitialLiquidity(
            f"sqrt(k) = {total} does not cover burn of {min_liquidity_burn}"
        )
    return PoolSnapshotV2(
        x=x0,
        y=y0,
        lp_supply=total - min_liquidity_burn,
        lp_burned=min_liquidity_burn,
        fee=fee,
        event_index=0,
    )


def apply_mint(pool: PoolSnapshotV2, ax, ay):
    """Deposit (ax, ay); mint LP tokens pro-rata on the scarcer side.

    Returns (new_pool, lp_minted). Excess on the richer side is donated to
    the pool, exactly as the min rule implies.
    """
    if ax <= 0 or ay <= 0:
        raise NonPositiveInput("mint amounts must be positive")
    if pool.lp_total == 0 or pool.x == 0 or pool.y == 0:
        raise EmptyPool("mint requires an initialized pool; use init_snapshot")
    total = pool.lp_total
    if _all_int(ax, ay, pool.x, pool.y, pool.lp_supply, pool.lp_burned):
        minted = min(ax * total // pool.x, ay * total // pool.y)
    else:
        minted = min(ax * total / pool.x, ay * total / pool.y)
    new = replace(
        pool,
        x=pool.x + ax,
        y=pool.y + ay,
        lp_supply=pool.lp_supply + minted,
        event_index=pool.event_index + 1,
    )
    return new, minted


def apply_burn(pool: PoolSnapshotV2, lp_amount):
    """Redeem lp_amount LP tokens for a pro-rata share of both reserves.

    Returns (new_pool, ax_out, ay_out).
    """
    if lp_amount <= 0:
        raise NonPositiveInput("burn amount must be positive")
    if lp_amount > pool.lp_supply:
        raise BurnExceedsSupply(f"burn {lp_amount} exceeds supply {pool.lp_supply}")
    total = pool.lp_total
    if _all_int(lp_amount, pool.x, pool.y, pool.lp_supply, pool.lp_burned):
        ax_out = lp_amount * pool.x // total
        ay_out = lp_amount * pool.y // total
    else:
        # Computing the share first keeps a full burn exact: ratio == 1.0.
        ratio = lp_amount / total
        ax_out = pool.x * ratio
        ay_out = pool.y * ratio
    new = replace(
        pool,
        x=pool.x - ax_out,
        y=pool.y - ay_out,
        lp_supply=pool.lp_supply - lp_amount,
        event_index=pool.event_index + 1,
    )
    return new, ax_out, ay_out


def _fee_adjusted_product(pool: PoolSnapshotV2, ax: float, ay: float) -> float:
    # The fee claws back a share of inflows only; outflows carry no fee term.
    x_adj = pool.x + ax - pool.fee * max(ax, 0.0)
    y_adj = pool.y + ay - pool.fee * max(ay, 0.0)
    return x_adj * y_adj


def apply_trade(pool: PoolSnapshotV2, ax: float, ay: float) -> PoolSnapshotV2:
    """Apply a trade with both flows known (signed, positive into the pool).

    Validates the fee-adjusted product rule: adjusted reserves after the
    trade must multiply to at least x * y. Logs that fail by more than
    INVARIANT_RTOL are malformed.
    """
    if ax == 0 and ay == 0:
        raise NonPositiveInput("trade must move at least one token")
    x_after = pool.x + ax
    y_after = pool.y + ay
    if x_after <= 0 or y_after <= 0:
        raise InvariantViolation("trade would drain a reserve")
    k = pool.x * pool.y
    if _fee_adjusted_product(pool, ax, ay) < k * (1.0 - INVARIANT_RTOL):
        raise InvariantViolation(
            f"fee-adjusted product {_fee_adjusted_product(pool, ax, ay):.6g} fell below k = {k:.6g}"
        )
    return replace(pool, x=x_after, y=y_after, event_index=pool.event_index + 1)


def infer_counterflow(pool: PoolSnapshotV2, ax: float) -> float:
    """Solve for the y flow of a trade given its x flow.

    Uses the strict form of the product rule, with the fee charged on the
    inflowing side only; a trade built from the result passes apply_trade
    exactly. The counterflow of an inflow is the swap output with its sign
    flipped.
    """
    if ax == 0:
        return 0 if _is_int(ax) else 0.0
    x_after = pool.x + ax
    if x_after <= 0:
        raise NoSolution("x flow drains the pool")
    if pool.x <= 0 or pool.y <= 0:
        raise EmptyPool("cannot trade against empty reserves")
    k = pool.x * pool.y
    if ax > 0:
        # x flows in, y flows out: (x' - f*ax) * y' = k.
        denom = x_after - pool.fee * ax
        if denom <= 0:
            raise NoSolution("fee-adjusted x reserve is not positive")
        y_after = k / denom
    else:
        # x flows out, y flows in: x' * (y' - f*(y' - y)) = k.
        y_after = (k / x_after - pool.fee * pool.y) / (1.0 - pool.fee)
    if y_after <= 0:
        raise NoSolution("implied y reserve is not positive")
    return y_after - pool.y


@dataclass(frozen=True)
class ReplayResult:
    snapshots: tuple
    warnings: tuple = field(default_factory=tuple)


def replay_events(
    events: Sequence[PoolEvent],
    initial: Optional[PoolSnapshotV2] = None,
    fee: float = _DEFAULT_FEE,
    min_liquidity_burn=MINIMUM_LIQUIDITY,
) -> ReplayResult:
    """Fold an ordered event stream into a snapshot per event.

    Without an initial snapshot the first event must be a mint, which
    creates the pool. Trades missing one flow get it inferred from the
    strict product rule; donations (both flows into the pool) are applied
    but flagged. Replay is deterministic: identical inputs give bitwise
    identical snapshots.
    """
    pool = initial
    snaps = []
    warnings = []
    for line_no, ev in enumerate(events, start=1):
        if pool is None:
            if ev.kind != "mint":
                raise EmptyPool(f"event {line_no}: first event must be a mint")
            pool = init_snapshot(ev.ax, ev.ay, min_liquidity_burn, fee)
        elif ev.kind == "mint":
            pool, _ = apply_mint(pool, ev.ax, ev.ay)
        elif ev.kind == "burn":
            lp = ev.lp_amount
            if lp <= 0:
                # Logs that record token amounts but not the LP amount:
                # recover it pro-rata from the x side.
                lp = ev.ax * pool.lp_total / pool.x
                share_y = ev.ay / pool.y
                if abs(share_y * pool.x - ev.ax) > 1e-6 * max(ev.ax, 1.0):
                    warnings.append(
                        f"event {line_no}: burn amounts are not pro-rata; using x share"
                    )
            pool, _, _ = apply_burn(pool, lp)
        else:
            ax, ay = ev.ax, ev.ay
            if ax is None and ay is not None:
                ax = infer_counterflow_y(pool, ay)
            elif ay is None and ax is not None:
                ay = infer_counterflow(pool, ax)
            if ax > 0 and ay > 0:
                warnings.append(f"event {line_no}: trade donates on both sides")
            pool = apply_trade(pool, ax, ay)
        pool = replace(pool, event_index=line_no)
        snaps.append(pool)
    return ReplayResult(snapshots=tuple(snaps), warnings=tuple(warnings))


def infer_counterflow_y(pool: PoolSnapshotV2, ay: float) -> float:
    """Mirror of infer_counterflow with the y flow known instead."""
    mirrored = PoolSnapshotV2(
        x=pool.y,
        y=pool.x,
        lp_supply=pool.lp_supply,
        lp_burned=pool.lp_burned,
        fee=pool.fee,
        event_index=pool.event_index,
    )
    return infer_counterflow(mirrored, ay)
