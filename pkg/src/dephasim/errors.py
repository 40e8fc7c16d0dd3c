"""Exception types shared across the package.

The CLI maps these onto exit codes: validation errors exit 2, domain
errors exit 3, convergence failures exit 4.
"""


class DephasimError(Exception):
    """Base class for all package errors."""


class ValidationError(DephasimError, ValueError):
    """A parameter, kernel, or qubit state violates its invariants."""


class DomainError(DephasimError, ValueError):
    """A formula was evaluated outside the domain where it is defined."""


class ConvergenceError(DephasimError, RuntimeError):
    """A numeric routine failed to reach its tolerance.

    Attributes
    ----------
    residual : float or None
        Achieved residual (estimated error or last relative change).
    last_iterates : tuple or None
        The last two iterates of an adaptive refinement, when available.
    """

    def __init__(self, message, residual=None, last_iterates=None):
        super().__init__(message)
        self.residual = residual
        self.last_iterates = last_iterates
