"""Exception types raised across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ValidationError(ValueError):
    """A model or configuration parameter is invalid."""

    def __init__(self, message: str, field: str | None = None) -> None:
        super().__init__(message)
        self.field = field


class ConvergenceError(ArithmeticError):
    """A truncated series did not converge within the allowed number of terms."""

    def __init__(self, message: str, partial_sum=None, n_terms: int = 0) -> None:
        super().__init__(message)
        self.partial_sum = partial_sum
        self.n_terms = n_terms


class AccuracyError(ArithmeticError):
    """A numerical approximation could not reach the requested accuracy."""

    def __init__(self, message: str, estimate: float | None = None) -> None:
        super().__init__(message)
        self.estimate = estimate


class ConfigError(ValueError):
    """A scenario configuration file could not be parsed or validated."""

    def __init__(self, message: str, lineno: int | None = None, field: str | None = None) -> None:
        super().__init__(message)
        self.lineno = lineno
        self.field = field
