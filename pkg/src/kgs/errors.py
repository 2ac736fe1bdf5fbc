"""Exception types shared across the package."""


class KgsError(Exception):
    """Base class for all package errors."""


class GraphFormatError(KgsError):
    """Raised when a graph payload cannot be parsed into graph data."""


class InvalidGraphError(KgsError):
    """Raised when graph data violates a structural invariant.

    Carries the offending validation violations in ``violations`` when the
    error originates from construction-time validation.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = tuple(violations)


class GraphMismatchError(KgsError):
    """Raised when a function, subset, or domain belongs to another graph."""


class SpectralError(KgsError):
    """Raised when an eigensolve or sphere maximization cannot be trusted."""


class ParameterRangeError(KgsError, ValueError):
    """Raised when (a, b, lambda, eta) violate a required parameter range."""


class ZeroFunctionError(KgsError, ValueError):
    """Raised when an operation requires a nonzero function."""


class NotInConeError(KgsError, ValueError):
    """Raised when a fiber operation is applied outside the admissible cone."""
