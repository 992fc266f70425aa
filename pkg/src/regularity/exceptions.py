"""Exception types raised across the package."""


class RegularityError(Exception):
    """Base class for all package errors."""


class DimensionError(RegularityError, ValueError):
    """Operands have incompatible or invalid shapes."""


class DegenerateDirectionError(RegularityError, ValueError):
    """A projection direction is the zero vector."""


class BudgetExceededError(RegularityError):
    """An exhaustive search would exceed its configured enumeration budget."""


class DomainError(RegularityError, ValueError):
    """Arguments are outside the domain of an operation."""


class ZeroMatrixError(RegularityError):
    """The matrix is identically zero, so it has no top singular direction."""


class ConvergenceError(RegularityError):
    """Power iteration did not converge.

    ``best`` holds the best iterate found (a ``SingularTriple``) and
    ``trace`` is filled in by the engine with the rounds completed so far.
    """

    def __init__(self, message, best=None, trace=None):
        super().__init__(message)
        self.best = best
        self.trace = trace
