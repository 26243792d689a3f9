"""Exception types shared across the package."""

from __future__ import annotations


class ZoproxError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(ZoproxError, ValueError):
    """A caller-supplied argument is outside its documented range."""


class OracleError(ZoproxError, RuntimeError):
    """The black box returned a non-finite value or broke its purity contract.

    Carries the offending evaluation point in ``point`` when available.
    """

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class NumericalError(ZoproxError, ArithmeticError):
    """A derivative estimate or model computation produced non-finite numbers."""


class SubproblemError(ZoproxError, ValueError):
    """The local model is malformed, e.g. a nonpositive curvature entry."""


class InexactSolveError(ZoproxError, RuntimeError):
    """The inner solver exhausted its iteration budget before certifying the gap.

    ``best`` holds the last iterate together with the smallest certified
    gap bound reached so far, so the caller can decide to accept it.
    """

    def __init__(self, message: str, best):
        super().__init__(message)
        self.best = best


class DatasetParseError(ZoproxError, ValueError):
    """A line of LIBSVM-format text could not be parsed."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number
