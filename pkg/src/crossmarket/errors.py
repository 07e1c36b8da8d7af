"""Exception hierarchy shared by every module in the package.

Operations raise the named errors below; plain ``ValueError`` is reserved for
violations of dataclass construction invariants (negative reserves, bad
labels, and so on).
"""


class CrossMarketError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------------------
# constant-product pool math

class NonPositiveInput(CrossMarketError):
    """A trade or deposit amount that must be positive was not."""


class EmptyPool(CrossMarketError):
    """Operation requires a pool with reserves on both sides."""


class OutputExceedsReserve(CrossMarketError):
    """Requested output amount is not available in the pool."""


class InsufficientInitialLiquidity(CrossMarketError):
    """Initial deposit too small to cover the minimum liquidity burn."""


class BurnExceedsSupply(CrossMarketError):
    """Burn amount larger than the outstanding LP supply."""


class InvariantViolation(CrossMarketError):
    """Fee-adjusted constant-product inequality failed on a trade event."""


class NoSolution(CrossMarketError):
    """No valid counterflow exists for the given known flow."""


# ---------------------------------------------------------------------------
# concentrated-liquidity tick math

class TickOutOfBounds(CrossMarketError):
    """Tick index outside the representable range."""


class NonPositivePrice(CrossMarketError):
    """Price arguments must be strictly positive."""


class RangeMispriced(CrossMarketError):
    """Deposit side cannot absorb liquidity given the market price."""


class MisalignedBounds(CrossMarketError):
    """Range bounds are not multiples of the tick spacing."""


# ---------------------------------------------------------------------------
# data ingestion and series handling

class ParseError(CrossMarketError):
    """Malformed row in a delimited input file."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class NonMonotonicTimestamp(CrossMarketError):
    """Timestamps decreased where a monotone series is required."""

    def __init__(self, line_no: int, message: str = "timestamp decreased"):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class SchemaError(CrossMarketError):
    """A structured record is missing or misusing a field."""

    def __init__(self, line_no: int, field: str):
        super().__init__(f"line {line_no}: bad or missing field: {field}")
        self.line_no = line_no
        self.field = field


class EmptyInput(CrossMarketError):
    """Operation requires a non-empty input."""


class IntervalMismatch(CrossMarketError):
    """Bar series being combined have different intervals."""


class UnstableConfig(CrossMarketError):
    """Synthetic generator configuration produced a divergent spread."""


# ---------------------------------------------------------------------------
# estimation

class SingularMoments(CrossMarketError):
    """Product-moment matrices are rank deficient."""


class SampleTooShort(CrossMarketError):
    """Not enough observations for the requested estimation."""


class LagTooLarge(CrossMarketError):
    """Requested lag order too large for the sample."""


class ZeroVector(CrossMarketError):
    """Orthogonal complement of the zero vector is undefined."""


class NotPositiveDefinite(CrossMarketError):
    """Covariance matrix is not positive definite, even after a ridge retry."""


class RankMismatch(CrossMarketError):
    """Operation requires cointegrating rank one."""


class DegenerateGeometry(CrossMarketError):
    """A normalizing scalar in the decomposition is numerically zero."""


class DegenerateSeries(CrossMarketError):
    """Increment series carries no variation."""


class ZeroDenominator(CrossMarketError):
    """Lead-lag ratio undefined: no nonzero correlations on either side."""


# ---------------------------------------------------------------------------
# pipeline

class ConfigError(CrossMarketError):
    """Invalid pipeline configuration. CLI exit code 1."""


class IngestError(CrossMarketError):
    """Input data could not be read. CLI exit code 2."""
