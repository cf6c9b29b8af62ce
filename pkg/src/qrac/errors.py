"""Exception hierarchy shared by every qrac module."""

from __future__ import annotations


class QracError(Exception):
    """Base class for all errors raised by qrac."""


class ValidationError(QracError, ValueError):
    """Input violates a documented precondition or invariant."""


class NotPSDError(ValidationError):
    """Matrix has an eigenvalue below the allowed negative tolerance."""

    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class UnsupportedDimensionError(ValidationError):
    """Construction is not available for the requested dimension."""


class StrategyFormatError(ValidationError):
    """Strategy document is malformed; ``location`` names the offending path."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


class NumericError(QracError, ArithmeticError):
    """A numerical routine failed or produced an out-of-range result."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual
