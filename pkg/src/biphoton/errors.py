"""Exception hierarchy.

Configuration problems (bad lengths, unknown keys, overlapping slits) derive
from :class:`ConfigError`; grid/resolution problems discovered while running
the numerics derive from :class:`NumericError`.  The CLI maps the two families
to different exit codes.
"""


class BiphotonError(Exception):
    pass


class ConfigError(BiphotonError, ValueError):
    pass


class NonPositiveLength(ConfigError):
    pass


class OverlappingSlits(ConfigError):
    pass


class UnknownKey(ConfigError):
    pass


class NumericError(BiphotonError, ArithmeticError):
    pass


class ZeroNorm(NumericError):
    pass


class GridTooNarrow(NumericError):
    pass


class GridMismatch(NumericError):
    pass


class OutOfRange(NumericError):
    pass


class AliasingRisk(NumericError):
    pass


class NonPositiveDistance(NumericError):
    pass


class UnderResolvedSlit(NumericError):
    pass


class UnderResolved(NumericError):
    pass


class TooFewPeaks(NumericError):
    pass


class GridTooLarge(NumericError):
    """A grid the run would need exceeds the memory budget."""
