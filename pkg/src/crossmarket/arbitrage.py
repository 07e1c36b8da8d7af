"""Gas-fee model and cross-market arbitrage-potential scanning.

Works on an aligned price pair where the first column is the centralized
venue and the second the decentralized one. The scan is direction-agnostic:
profitability is judged on the absolute spread, from which the round-trip
gas cost is subtracted. Slippage and centralized-exchange fees are out of
scope.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .errors import EmptyInput
from .marketdata import AlignedPair


@dataclass(frozen=True)
class GasFeeModel:
    """On-chain transaction cost assumptions.

    legs counts the transactions per arbitrage attempt; a round trip
    (enter and exit) is the default.
    """

    gas_price_gwei: float
    eth_usd: float
    gas_limit: int = 50_000
    legs: int = 2

    def __post_init__(self):
        if not (self.gas_price_gwei > 0 and math.isfinite(self.gas_price_gwei)):
            raise ValueError("gas_price_gwei must be positive and finite")
        if not (self.eth_usd > 0 and math.isfinite(self.eth_usd)):
            raise ValueError("eth_usd must be positive and finite")
        if not isinstance(self.gas_limit, int) or self.gas_limit <= 0:
            raise ValueError("gas_limit must be a positive integer")
        if not isinstance(self.legs, int) or self.legs < 1:
            raise ValueError("legs must be an integer >= 1")

    @property
    def fee_eth(self) -> float:
        """ETH cost of one transaction: gas price times gas limit."""
        return self.gas_price_gwei * self.gas_limit * 1e-9


@dataclass(frozen=True)
class GasFeeBreakdown:
    fee_eth_per_leg: float
    fee_usd_per_leg: float
    fee_usd_total: float


def gas_fee(model: GasFeeModel) -> GasFeeBreakdown:
    """Per-leg and round-trip transaction cost in ETH and USD."""
    eth = model.fee_eth
    usd = eth * model.eth_usd
    return GasFeeBreakdown(
        fee_eth_per_leg=eth,
        fee_usd_per_leg=usd,
        fee_usd_total=usd * model.legs,
    )


@dataclass(frozen=True)
class ArbOpportunity:
    """One aligned observation with its spread and fee-adjusted result.

    fee_pct_of_spread is None when the gross spread is zero (the ratio is
    undefined there).
    """

    timestamp: int
    price_centralized: float
    price_defi: float
    gross_spread_usd: float
    total_fee_usd: float
    net_usd: float
    fee_pct_of_spread: Optional[float]

    def __post_init__(self):
        if self.net_usd != abs(self.gross_spread_usd) - self.total_fee_usd:
            raise ValueError("net_usd must equal |gross spread| minus total fee")
        if self.gross_spread_usd == 0.0:
            if self.fee_pct_of_spread is not None:
                raise ValueError("fee share is undefined on a zero spread")
        elif self.fee_pct_of_spread is None or self.fee_pct_of_spread < 0:
            raise ValueError("fee share must be a nonnegative ratio")


def scan(pair: AlignedPair, model: GasFeeModel) -> List[ArbOpportunity]:
    """Fee-adjusted spread record for every aligned row, in time order.

    Column a of the pair is the centralized price, column b the
    decentralized one; the gross spread is defi minus centralized.
    """
    if len(pair) == 0:
        raise EmptyInput("aligned pair has no rows")
    fee = gas_fee(model).fee_usd_total
    out = []
    for ts, cex, defi in zip(
        pair.timestamps.tolist(), pair.price_a.tolist(), pair.price_b.tolist()
    ):
        gross = defi - cex
        out.append(
            ArbOpportunity(
                timestamp=int(ts),
                price_centralized=cex,
                price_defi=defi,
                gross_spread_usd=gross,
                total_fee_usd=fee,
                net_usd=abs(gross) - fee,
                fee_pct_of_spread=None if gross == 0.0 else fee / abs(gross),
            )
        )
    return out


@dataclass(frozen=True)
class ArbSummary:
    top: Tuple[ArbOpportunity, ...]
    mean_net_usd: float
    count_profitable: int


def summarize(ops: Sequence[ArbOpportunity], k: int = 5) -> ArbSummary:
    """Best k records by net result, plus mean and profitable count.

    Ties on net_usd go to the earlier timestamp.
    """
    if not ops:
        raise EmptyInput("no opportunities to summarize")
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(ops, key=lambda op: (-op.net_usd, op.timestamp))
    return ArbSummary(
        top=tuple(ranked[:k]),
        mean_net_usd=math.fsum(op.net_usd for op in ops) / len(ops),
        count_profitable=sum(1 for op in ops if op.net_usd > 0),
    )


def opportunities_csv(ops: Sequence[ArbOpportunity]) -> str:
    """Plot-ready CSV of scanned rows."""
    lines = ["timestamp,price_centralized,price_defi,fee_usd,net_usd"]
    lines.extend(
        f"{op.timestamp},{op.price_centralized!r},{op.price_defi!r},"
        f"{op.total_fee_usd!r},{op.net_usd!r}"
        for op in ops
    )
    return "\n".join(lines) + "\n"
