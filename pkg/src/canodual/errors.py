"""Exception types shared across the package."""


class CanodualError(Exception):
    """Base class for all package errors."""


class DomainError(CanodualError, ValueError):
    """Argument lies outside the admissible domain of a map."""


class SingularityError(CanodualError, ArithmeticError):
    """Evaluation requested too close to a pole (G(sigma) = 0 or sigma = -y)."""


class RegimeError(CanodualError, ValueError):
    """Problem parameters fall outside the regime the solver supports."""


class ConsistencyError(CanodualError, RuntimeError):
    """Two independent routes to the same quantity disagree."""


class PreconditionError(CanodualError):
    """A check was requested but its hypotheses are not met."""
