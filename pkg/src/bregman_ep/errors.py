"""Exception types shared across the package."""


class BregmanError(Exception):
    """Base class for all library errors."""


class DomainError(BregmanError, ValueError):
    """A point lies outside the domain required by an operation."""


class ArgumentError(BregmanError, ValueError):
    """An argument violates an operation's precondition."""


class InfeasibleError(BregmanError):
    """A set has no point in the domain of the Legendre function."""


class ConvergenceError(BregmanError, RuntimeError):
    """An iterative solver hit its iteration cap.

    ``iteration`` is the outer iteration index when raised from inside a
    solver run, and ``trace`` holds the records produced before failure.
    """

    def __init__(self, message, iteration=None, trace=None):
        super().__init__(message)
        self.iteration = iteration
        self.trace = trace
