"""
Recursive Bayesian state estimation for one character decision.

The posterior after a sequence is the prior times the likelihood ratio of
every trial that contains the symbol, renormalized. Products are kept in log
space: eight sequences of fourteen ratios overflow a float otherwise.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional, Protocol, runtime_checkable

import numpy as np

from src.core.models import EpochState, Pmf, SequenceSpec, apply_floor
from src.evidence.density import EvidenceModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecisionConfig:
    """When an epoch stops querying and commits its MAP symbol."""

    confidence_threshold: float = 0.9
    max_sequences: int = 8
    max_trials: Optional[int] = None

    def __post_init__(self) -> None:
        if not 0.5 < self.confidence_threshold < 1.0:
            raise ValueError(
                f"confidence_threshold must lie in (0.5, 1), got {self.confidence_threshold}"
            )
        if self.max_sequences < 1:
            raise ValueError(f"max_sequences must be positive, got {self.max_sequences}")
        if self.max_trials is not None and self.max_trials < 1:
            raise ValueError(f"max_trials must be positive, got {self.max_trials}")


@runtime_checkable
class QuerySource(Protocol):
    """Chooses the next sequence to present given the current posterior."""

    def next_sequence(self, posterior: Pmf) -> SequenceSpec:
        ...


@runtime_checkable
class EvidenceSource(Protocol):
    """Produces one evidence score per trial for a hidden target."""

    def observe(self, sequence: SequenceSpec) -> np.ndarray:
        ...


def _log_weights(prior: Pmf) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(prior.weights)


def _from_log_weights(log_w: np.ndarray) -> Pmf:
    shifted = np.exp(log_w - log_w.max())
    return Pmf(apply_floor(shifted / shifted.sum()))


def update_from_log_ratios(
    prior: Pmf, sequence: SequenceSpec, log_ratios: Sequence[float] | np.ndarray
) -> Pmf:
    """
    Posterior from precomputed per-trial log likelihood ratios.

    Raises:
        ValueError: if the number of ratios differs from the number of trials
    """
    log_ratios = np.asarray(log_ratios, dtype=float)
    if log_ratios.shape != (len(sequence),):
        raise ValueError(f"{log_ratios.size} evidence values for {len(sequence)} trials")
    if len(sequence) == 0:
        return prior
    log_w = _log_weights(prior) + sequence.incidence(len(prior)).T @ log_ratios
    return _from_log_weights(log_w)


def posterior_update(
    prior: Pmf,
    sequence: SequenceSpec,
    evidence: Sequence[float] | np.ndarray,
    model: EvidenceModel,
) -> Pmf:
    """
    Fuse one sequence of evidence into the prior.

    For each symbol x the weight is prior(x) times the product of
    p(e_j|1) / p(e_j|0) over the trials j that contain x.

    Example usage:
        model = gaussian_evidence_model(0.8)
        posterior = posterior_update(prior, sequence, [0.4, -1.2, 0.9], model)
    """
    evidence = np.asarray(evidence, dtype=float)
    if evidence.shape != (len(sequence),):
        raise ValueError(f"{evidence.size} evidence values for {len(sequence)} trials")
    return update_from_log_ratios(prior, sequence, model.log_likelihood_ratio(evidence))


def batch_posterior(
    prior: Pmf,
    observations: Sequence[tuple[SequenceSpec, Sequence[float]]],
    model: EvidenceModel,
) -> Pmf:
    """Single normalized product over every (sequence, evidence) pair."""
    log_w = _log_weights(prior)
    for sequence, evidence in observations:
        evidence = np.asarray(evidence, dtype=float)
        if evidence.shape != (len(sequence),):
            raise ValueError(f"{evidence.size} evidence values for {len(sequence)} trials")
        if len(sequence):
            log_w = log_w + sequence.incidence(len(prior)).T @ model.log_likelihood_ratio(evidence)
    return _from_log_weights(log_w)


@dataclass(frozen=True)
class EpochResult:
    """Outcome of one epoch."""

    decision: int
    sequences_used: int
    trial_count: int
    posterior: Pmf
    state: EpochState


def run_epoch(
    prior: Pmf,
    query_source: QuerySource,
    evidence_source: EvidenceSource,
    config: DecisionConfig,
    model: EvidenceModel,
) -> EpochResult:
    """
    Query, observe and update until the posterior maximum reaches the
    threshold or max_sequences have been shown, then commit the argmax.

    A prior that already meets the threshold commits with zero sequences.
    Every sequence must hold between one and config.max_trials trials, the
    vocabulary size when unset.
    """
    state = EpochState(posterior=prior, max_sequences=config.max_sequences)
    while (
        state.posterior.max() < config.confidence_threshold
        and state.sequences_shown < config.max_sequences
    ):
        sequence = query_source.next_sequence(state.posterior)
        sequence.validate(config.max_trials or len(prior))
        evidence = evidence_source.observe(sequence)
        posterior = posterior_update(state.posterior, sequence, evidence, model)
        state.record(sequence, evidence, posterior)

    state.committed = state.posterior.argmax()
    logger.debug(
        f"Epoch committed symbol {state.committed} after {state.sequences_shown} sequences "
        f"(p={state.posterior.max():.3f})"
    )
    return EpochResult(
        decision=state.committed,
        sequences_used=state.sequences_shown,
        trial_count=state.trial_count,
        posterior=state.posterior,
        state=state,
    )
