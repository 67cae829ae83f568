"""Exception hierarchy.

Errors split into two families so the command line can map them onto exit
codes: ``ConfigError`` (bad input, exit 1) and ``MathError`` (spectral or
numerical failure, exit 2).
"""


class KreinError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(KreinError):
    """Malformed or inconsistent problem description."""


class DimensionMismatch(KreinError, ValueError):
    pass


class EmptyOmega(KreinError, ValueError):
    pass


class MissingExteriorRule(KreinError, ValueError):
    """An extension operator has no functional for a needed exterior point."""


class EpsilonError(KreinError, ValueError):
    """No unique unit offset leads from an exterior point back into the domain."""


class NotFound(EpsilonError):
    pass


class NotUnique(EpsilonError):
    pass


class InvalidDefect(KreinError, ValueError):
    """Removed points violate the hole hypotheses (inner, non-adjacent)."""


class MathError(KreinError, ArithmeticError):
    """Base class for failures caused by the spectral parameter or by
    numerical singularity."""


class SingularMatrix(MathError):
    pass


class ZeroPivot(SingularMatrix):
    pass


class SingularBoundarySystem(MathError):
    pass


class LambdaOnSpectrum(MathError):
    pass


class ResonantRankOne(MathError):
    pass


class ResonantDenominator(MathError):
    pass
