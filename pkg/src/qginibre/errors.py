"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to.
"""


class QGinibreError(Exception):
    exit_code = 1


class UsageError(QGinibreError, ValueError):
    """Invalid arguments or malformed input (bad shape, out-of-range index)."""

    exit_code = 2


class DomainError(UsageError):
    """Argument outside the mathematical domain of a function."""


class NumericalError(QGinibreError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance."""

    exit_code = 3

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class IntegrityError(NumericalError):
    """A structural identity (conjugate pairing, antisymmetry...) was violated."""
