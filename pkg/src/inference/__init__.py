"""Posterior fusion and epoch decisions."""

from .rbse import (
    DecisionConfig,
    EpochResult,
    EvidenceSource,
    QuerySource,
    batch_posterior,
    posterior_update,
    run_epoch,
    update_from_log_ratios,
)

__all__ = [
    "DecisionConfig",
    "EpochResult",
    "EvidenceSource",
    "QuerySource",
    "batch_posterior",
    "posterior_update",
    "run_epoch",
    "update_from_log_ratios",
]
