"""Shared domain vocabulary: symbols, trials, sequences, epochs and PMFs."""

from .exceptions import (
    CalibrationError,
    CodebookError,
    ConfigError,
    DegeneratePosteriorError,
    EvidenceModelError,
    InfeasibleQueryError,
    PairingError,
    SimulationError,
    SingularCovarianceError,
    StatisticsError,
)
from .models import (
    BACKSPACE,
    PROBABILITY_FLOOR,
    SPACE,
    EpochState,
    Pmf,
    SequenceSpec,
    Trial,
    Vocabulary,
    apply_floor,
    label,
    normalize,
)

__all__ = [
    # Models
    "BACKSPACE",
    "PROBABILITY_FLOOR",
    "SPACE",
    "EpochState",
    "Pmf",
    "SequenceSpec",
    "Trial",
    "Vocabulary",
    "apply_floor",
    "label",
    "normalize",
    # Exceptions
    "CalibrationError",
    "CodebookError",
    "ConfigError",
    "DegeneratePosteriorError",
    "EvidenceModelError",
    "InfeasibleQueryError",
    "PairingError",
    "SimulationError",
    "SingularCovarianceError",
    "StatisticsError",
]
