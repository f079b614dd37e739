"""Exception types raised across the package."""


class LocGaussError(Exception):
    """Base class for all package errors."""


class ParameterError(LocGaussError, ValueError):
    """A model or configuration parameter is outside its domain."""


class ShapeError(LocGaussError, ValueError):
    """Input array has the wrong shape or is too short for the block plan."""


class DegenerateVolatilityError(LocGaussError, ArithmeticError):
    """A volatility estimate needed to standardize a kept increment is zero."""


class EmptyStatisticError(LocGaussError, ValueError):
    """No increment survived truncation, so the empirical CDF is undefined."""


class AccuracyError(LocGaussError, ArithmeticError):
    """Numerical quadrature did not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class DataError(LocGaussError, ValueError):
    """Input data violates a content rule (nonpositive price, duplicate time, ...)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ParseError(DataError):
    """A CSV row could not be parsed."""
