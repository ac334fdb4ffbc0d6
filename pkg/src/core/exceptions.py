"""
Exceptions for the typing simulator.

Every domain failure derives from SimulationError; the CLI maps it to the
runtime exit code.
"""

from typing import Optional


class SimulationError(Exception):
    """Base exception for simulator errors."""

    def __init__(self, message: str, details: str = ""):
        self.details = details
        super().__init__(message)


class DegeneratePosteriorError(SimulationError):
    """Raised when a probability vector has no positive mass left."""

    pass


class InfeasibleQueryError(SimulationError):
    """Raised when no sequence of the requested size satisfies the pool constraints."""

    def __init__(self, message: str, constraint: str = "", details: str = ""):
        self.constraint = constraint
        super().__init__(message, details)


class CalibrationError(SimulationError):
    """Raised when calibration data cannot support a classifier fit."""

    pass


class SingularCovarianceError(CalibrationError):
    """Raised when a regularized covariance is not positive definite."""

    pass


class EvidenceModelError(SimulationError):
    """Raised for malformed or unusable evidence models."""

    pass


class CodebookError(SimulationError):
    """Raised when a code matrix cannot be built or loses identifiability."""

    pass


class StatisticsError(SimulationError):
    """Raised when a statistical test has no usable data."""

    pass


class PairingError(SimulationError):
    """Raised when two reports cannot be paired key by key."""

    def __init__(self, message: str, missing_keys: Optional[list] = None):
        self.missing_keys = missing_keys or []
        super().__init__(message)


class ConfigError(SimulationError):
    """Raised for invalid configuration files and experiment manifests."""

    def __init__(self, message: str, key: str = ""):
        self.key = key
        super().__init__(message)
