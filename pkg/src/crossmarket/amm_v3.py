"""Concentrated-liquidity tick math: prices, positions, per-range reserves.

Prices live on the geometric grid p_i = 1.0001**i. A position supplies
liquidity L over [i_lower, i_upper]; inside each elementary range the token
split depends on where the market price sits relative to the range. This
module reconstructs per-range reserves and an order-book style depth profile
from a list of positions. Floating point only: the math here is analytical,
not consensus-critical, so 64-bit precision is adequate (roughly 4-5
significant digits survive at raw on-chain magnitudes).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    MisalignedBounds,
    NonPositiveInput,
    NonPositivePrice,
    RangeMispriced,
    TickOutOfBounds,
)

LN_BASE = math.log(1.0001)

# Largest tick whose price fits the protocol's fixed-point range.
MAX_TICK = 887272


def _pow_tick(i: float) -> float:
    return math.exp(i * LN_BASE)


def _sqrt_tick(i: float) -> float:
    return math.exp(0.5 * i * LN_BASE)


def tick_to_price(i: int) -> float:
    """Raw price at tick i, i.e. 1.0001**i."""
    if abs(i) > MAX_TICK:
        raise TickOutOfBounds(f"tick {i} outside +/-{MAX_TICK}")
    return _pow_tick(i)


def price_to_tick(p: float) -> int:
    """Largest tick whose price does not exceed p.

    Guarantees tick_to_price(i) <= p < tick_to_price(i + 1); the float
    logarithm is followed by a fix-up step so the bracketing holds exactly.
    """
    if p <= 0 or math.isnan(p):
        raise NonPositivePrice(f"price must be positive, got {p}")
    i = math.floor(math.log(p) / LN_BASE)
    while _pow_tick(i) > p:
        i -= 1
    while _pow_tick(i + 1) <= p:
        i += 1
    if abs(i) > MAX_TICK:
        raise TickOutOfBounds(f"price {p} maps to tick {i} outside +/-{MAX_TICK}")
    return i


@dataclass(frozen=True)
class PriceDecimals:
    """ERC-20 decimal counts for the two tokens of a pool."""

    d_x: int
    d_y: int

    def __post_init__(self):
        if not (0 <= self.d_x <= 38 and 0 <= self.d_y <= 38):
            raise ValueError("token decimals must lie in [0, 38]")


def adjust_price(p_raw: float, dec: PriceDecimals) -> Tuple[float, float]:
    """Convert a raw pool price into human units.

    Returns (price of token X in Y units, its inverse). Raw prices carry the
    decimal mismatch of the two tokens, removed by 10**(d_y - d_x).
    """
    if p_raw <= 0:
        raise NonPositivePrice("raw price must be positive")
    human = p_raw / 10.0 ** (dec.d_y - dec.d_x)
    return human, 1.0 / human


@dataclass(frozen=True)
class LiquidityPosition:
    """A liquidity deposit active on the tick range [i_lower, i_upper]."""

    i_lower: int
    i_upper: int
    liquidity: float

    def __post_init__(self):
        if self.i_lower >= self.i_upper:
            raise ValueError("position range must have i_lower < i_upper")
        if self.liquidity <= 0:
            raise ValueError("position liquidity must be positive")


@dataclass(frozen=True)
class TickRangeReserves:
    """Aggregated liquidity and raw token reserves of one elementary range."""

    i: int
    liquidity: float
    x: float
    y: float

    def __post_init__(self):
        if self.liquidity < 0:
            raise ValueError("range liquidity cannot be negative")
        if self.x < 0 or self.y < 0:
            raise ValueError("range reserves cannot be negative")


def _clamp(v: float, lo: float, hi: float) -> float:
    return min(max(v, lo), hi)


def _check_aligned(i: int, spacing: int):
    if spacing <= 0:
        raise ValueError("tick spacing must be positive")
    if i % spacing != 0:
        raise MisalignedBounds(f"tick {i} is not a multiple of spacing {spacing}")


def range_reserves(
    liquidity: float,
    i: int,
    spacing: int,
    i_mkt: Optional[int] = None,
    p_mkt: Optional[float] = None,
) -> Tuple[float, float]:
    """Token reserves held by liquidity on the range [i, i + spacing].

    The anchor price z is the market price clamped into the range. X sits
    between z and the upper bound, Y between the lower bound and z, so a
    range strictly above the market holds only X and one strictly below
    holds only Y.
    """
    if liquidity < 0:
        raise NonPositiveInput("liquidity cannot be negative")
    _check_aligned(i, spacing)
    if (i_mkt is None) == (p_mkt is None):
        raise ValueError("provide exactly one of i_mkt and p_mkt")
    if p_mkt is None:
        p_mkt = _pow_tick(i_mkt)
    elif p_mkt <= 0:
        raise NonPositivePrice("market price must be positive")
    p_lo = _pow_tick(i)
    p_hi = _pow_tick(i + spacing)
    z = _clamp(p_mkt, p_lo, p_hi)
    sqrt_z = math.sqrt(z)
    x = liquidity / sqrt_z - liquidity / math.sqrt(p_hi)
    y = liquidity * (sqrt_z - math.sqrt(p_lo))
    return x, y


def position_liquidity(
    amount: float,
    side: str,
    i_mkt: int,
    i_lower: int,
    i_upper: int,
    spacing: Optional[int] = None,
) -> Tuple[float, float]:
    """Infer position liquidity from a deposit of one token.

    Returns (liquidity, implied amount of the other token), both raw. The
    deposited side must be able to absorb liquidity at the current market
    price: Y fills below the anchor, X above it.
    """
    if amount <= 0:
        raise NonPositiveInput("deposit amount must be positive")
    if i_lower >= i_upper:
        raise ValueError("range must have i_lower < i_upper")
    if side not in ("x", "y"):
        raise ValueError("side must be 'x' or 'y'")
    if spacing is not None:
        _check_aligned(i_lower, spacing)
        _check_aligned(i_upper, spacing)
    p_lo = _pow_tick(i_lower)
    p_hi = _pow_tick(i_upper)
    z = _clamp(_pow_tick(i_mkt), p_lo, p_hi)
    sqrt_z = math.sqrt(z)
    sqrt_lo = math.sqrt(p_lo)
    sqrt_hi = math.sqrt(p_hi)
    if side == "y":
        if z <= p_lo:
            raise RangeMispriced("range lies at or above market; y cannot absorb liquidity")
        liquidity = amount / (sqrt_z - sqrt_lo)
        counter = liquidity / sqrt_z - liquidity / sqrt_hi
    else:
        if z >= p_hi:
            raise RangeMispriced("range lies at or below market; x cannot absorb liquidity")
        liquidity = amount * sqrt_z * sqrt_hi / (sqrt_hi - sqrt_z)
        counter = liquidity * (sqrt_z - sqrt_lo)
    return liquidity, counter


def aggregate_ranges(positions: Sequence[LiquidityPosition], spacing: int) -> Dict[int, float]:
    """Sum position liquidity over each covered elementary range.

    Keys are range start ticks; a range [i, i + spacing] collects every
    position whose bounds cover it. Ranges no position touches are absent.
    """
    acc: Dict[int, float] = {}
    for pos in positions:
        _check_aligned(pos.i_lower, spacing)
        _check_aligned(pos.i_upper, spacing)
        for start in range(pos.i_lower, pos.i_upper, spacing):
            acc[start] = acc.get(start, 0.0) + pos.liquidity
    return acc


@dataclass(frozen=True)
class DepthRow:
    """One rung of the reconstructed book: an elementary range with its
    liquidity, human price bounds, and human token reserves."""

    i_lower: int
    i_upper: int
    price_lower: float
    price_upper: float
    liquidity: float
    x: float
    y: float
    is_touch: bool


def depth_profile(
    positions: Sequence[LiquidityPosition],
    spacing: int,
    i_mkt: int,
    dec: PriceDecimals,
) -> List[DepthRow]:
    """Order-book style view of a position list.

    Rows ascend by tick; the row whose range contains the market tick is
    flagged as the touch. Prices and reserves are converted to human units
    with the pool's token decimals.
    """
    ranges = aggregate_ranges(positions, spacing)
    rows = []
    for start in sorted(ranges):
        liq = ranges[start]
        x_raw, y_raw = range_reserves(liq, start, spacing, i_mkt=i_mkt)
        lo_human, _ = adjust_price(_pow_tick(start), dec)
        hi_human, _ = adjust_price(_pow_tick(start + spacing), dec)
        rows.append(
            DepthRow(
                i_lower=start,
                i_upper=start + spacing,
                price_lower=lo_human,
                price_upper=hi_human,
                liquidity=liq,
                x=x_raw / 10.0 ** dec.d_x,
                y=y_raw / 10.0 ** dec.d_y,
                is_touch=start <= i_mkt < start + spacing,
            )
        )
    return rows
