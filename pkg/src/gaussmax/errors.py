"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class ModelInvalidError(ValueError):
    """A covariance model cannot be realized as a valid correlation matrix."""


class InadmissibleError(ValueError):
    """A transform or normalizer fails one of its admissibility guards."""


class ConfigError(ValueError):
    """A configuration file or command line cannot be turned into an experiment."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")
