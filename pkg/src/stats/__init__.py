"""Statistical post-processing of study outcomes."""

from .beta import BetaFit, beta_fit_ci
from .summary import (
    COMPARISON_COLUMNS,
    SESSION_COLUMNS,
    ComparisonRow,
    GroupSummary,
    PhraseOutcome,
    compare_arms,
    session_metrics,
    summarize_groups,
)
from .wilcoxon import WilcoxonResult, wilcoxon_signed_rank

__all__ = [
    "COMPARISON_COLUMNS",
    "SESSION_COLUMNS",
    "BetaFit",
    "ComparisonRow",
    "GroupSummary",
    "PhraseOutcome",
    "WilcoxonResult",
    "beta_fit_ci",
    "compare_arms",
    "session_metrics",
    "summarize_groups",
    "wilcoxon_signed_rank",
]
