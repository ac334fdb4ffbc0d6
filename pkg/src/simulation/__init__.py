"""Copy-phrase typing simulation and the Monte-Carlo study runner."""

from .copy_phrase import (
    PhraseRecord,
    PhraseTask,
    SimulatedUser,
    UserEvidenceSource,
    epoch_timing,
    type_phrase,
)
from .study import (
    DEFAULT_PHRASES_PER_LEVEL,
    DEFAULT_REPS,
    PPC_BY_AUC_COLUMNS,
    TTD_SCATTER_COLUMNS,
    SessionReport,
    StudyReport,
    UserProfile,
    build_users,
    run_cell,
    run_study,
)

__all__ = [
    "DEFAULT_PHRASES_PER_LEVEL",
    "DEFAULT_REPS",
    "PPC_BY_AUC_COLUMNS",
    "TTD_SCATTER_COLUMNS",
    "PhraseRecord",
    "PhraseTask",
    "SessionReport",
    "SimulatedUser",
    "StudyReport",
    "UserEvidenceSource",
    "UserProfile",
    "build_users",
    "epoch_timing",
    "run_cell",
    "run_study",
    "type_phrase",
]
