"""Custom exceptions for relevant-sampling."""

from typing import Optional


class RelevantSamplingError(Exception):
    """Base exception for relevant-sampling."""
    pass


class ConfigError(RelevantSamplingError):
    """Configuration and config-file parse errors."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{location}{message}")


class InvalidArgumentError(RelevantSamplingError, ValueError):
    """An argument is outside the range an operation accepts."""
    pass


class InfeasibleTargetError(InvalidArgumentError):
    """Requested concentration cannot be reached inside the prolate span."""

    def __init__(self, message: str, min_delta: float):
        self.min_delta = min_delta
        super().__init__(message)


class TheoremViolationError(RelevantSamplingError):
    """A deterministic inequality failed; this can only mean a bug."""
    pass


class StatisticalFailureError(RelevantSamplingError):
    """Empirical failure frequency exceeded its tail bound after the rerun."""
    pass
