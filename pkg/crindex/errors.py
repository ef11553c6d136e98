"""Exception hierarchy shared by all crindex modules."""

from typing import Optional, Sequence


class CrIndexError(Exception):
    """Base class for every error raised by crindex."""


class ExpressionError(CrIndexError, ValueError):
    """Invalid defining-function expression.

    Args:
        message: Human readable description
        position: Character offset in the source text, if known
    """

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class ExprSyntaxError(ExpressionError):
    pass


class UnknownIdentifierError(ExpressionError):
    pass


class CoordinateRangeError(ExpressionError):
    pass


class RealnessError(ExpressionError):
    pass


class ExprDomainError(ExpressionError):
    """Raised for log/sqrt outside their real domain and for division by zero."""


class ConfigError(CrIndexError, ValueError):
    pass


class JetOrderError(CrIndexError, ValueError):
    pass


class ProjectionError(CrIndexError, RuntimeError):
    pass


class SamplerStarvationError(CrIndexError, RuntimeError):
    pass


class PseudoconvexityError(CrIndexError, RuntimeError):
    """A boundary sample has a negative Levi eigenvalue.

    Args:
        message: Diagnostic text
        point: The offending boundary point
    """

    def __init__(self, message: str, point: Optional[Sequence[complex]] = None):
        self.point = None if point is None else list(point)
        super().__init__(message)


class EigenSolverError(CrIndexError, RuntimeError):
    pass


class NullSpaceError(CrIndexError, ValueError):
    pass


class OracleError(CrIndexError, ValueError):
    pass


class ConsistencyError(CrIndexError, RuntimeError):
    pass
