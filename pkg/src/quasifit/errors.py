"""Exception types raised across the package."""


class QuasifitError(Exception):
    """Base class for all package errors."""


class NumericalFailure(QuasifitError):
    """An LP/QP kernel could not finish (stalled pivoting, lost definiteness)."""


class DimensionMismatch(QuasifitError, ValueError):
    pass


class InvalidParams(QuasifitError, ValueError):
    pass


class EmptyData(QuasifitError, ValueError):
    pass


class DomainError(QuasifitError, ValueError):
    pass


class TooLarge(QuasifitError, ValueError):
    pass


class NodeLimitExceeded(QuasifitError):
    """Branch-and-bound hit its node cap before closing the gap.

    The best feasible solution found so far is attached as ``solution``.
    """

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution
