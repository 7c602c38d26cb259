"""Exception types raised across the package."""

from __future__ import annotations


class PrefOptError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(PrefOptError, ValueError):
    pass


class InvalidInputError(PrefOptError, ValueError):
    pass


class AbortTrial(PrefOptError):
    """Raised when an interactive trial cannot continue.

    The optimizer attaches the partial trace as ``trace`` before re-raising.
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class DivergedError(PrefOptError):
    """The iterate left the finite region; ``trace`` holds the rows recorded so far."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class NumericError(PrefOptError, ArithmeticError):
    pass


class UnsupportedMetricError(PrefOptError, ValueError):
    pass


class InsufficientDataError(PrefOptError, ValueError):
    pass


class ConfigError(PrefOptError, ValueError):
    pass


class ExperimentError(PrefOptError):
    pass


class TuningError(PrefOptError):
    pass
