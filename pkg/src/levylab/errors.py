"""Exception hierarchy shared by every levylab module."""


class LevyError(Exception):
    """Base class for all levylab failures."""


class DomainError(LevyError, ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedFamilyError(LevyError, TypeError):
    """The operation is not defined for the given process family."""


class NumericalError(LevyError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    ``residual`` carries the last error estimate when one is available.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class StepOverflowError(NumericalError):
    """Euler state became non-finite at ``step``."""

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class AcceptanceRateError(DomainError):
    """Rejection sampling would stall; the grid must be refined."""


class CertificateFailure(LevyError, AssertionError):
    """A numerical certificate (bound, invariant) was violated."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row
