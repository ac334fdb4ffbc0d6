"""
Modular query objective.

For a sequence Phi and posterior Pi the objective is

    Q(Phi) = log(sigma_plus) * sum_x Pi(x) * c_plus(x, x, Phi)

where c_plus(x, x, Phi) counts the trials of Phi that contain x. Q depends
only on how often each symbol is flashed, so its discrete derivative with
respect to a new trial A is log(sigma_plus) * Pi(A), whatever was selected
before.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from src.core.exceptions import EvidenceModelError
from src.core.models import Pmf, SequenceSpec, Trial
from src.evidence.density import EvidenceModel, SigmaEstimates

logger = logging.getLogger(__name__)

# Quadrature noise can put log(sigma_plus) a hair below zero for identical classes
_LOG_SIGMA_SLACK = 1e-6


@dataclass(frozen=True, eq=False)
class CandidatePool:
    """
    Feasible trials for one sequence.

    Attributes:
        candidates: distinct trials the selector may pick from
        per_symbol_budget: maximum appearances of any symbol in a selected sequence
        selection_size: number of trials to select (N_t)
        n_symbols: vocabulary size the trials index into
    """

    candidates: tuple[Trial, ...]
    per_symbol_budget: int
    selection_size: int
    n_symbols: int

    def __post_init__(self) -> None:
        candidates = tuple(self.candidates)
        object.__setattr__(self, "candidates", candidates)
        if len(set(candidates)) != len(candidates):
            raise ValueError("Candidate trials must be distinct")
        if not 1 <= self.selection_size <= len(candidates):
            raise ValueError(
                f"selection_size {self.selection_size} outside [1, {len(candidates)}]"
            )
        if self.per_symbol_budget < 1:
            raise ValueError(f"per_symbol_budget must be >= 1, got {self.per_symbol_budget}")
        incidence = SequenceSpec(candidates).incidence(self.n_symbols)
        incidence.setflags(write=False)
        object.__setattr__(self, "incidence", incidence)

    def __len__(self) -> int:
        return len(self.candidates)


@dataclass(frozen=True, eq=False)
class QueryObjective:
    """Posterior and log(sigma_plus) defining Q."""

    posterior: Pmf
    log_sigma_plus: float

    def __post_init__(self) -> None:
        value = float(self.log_sigma_plus)
        if not math.isfinite(value):
            raise EvidenceModelError(f"log sigma_plus is not finite: {value}")
        if value < 0:
            if value < -_LOG_SIGMA_SLACK:
                raise EvidenceModelError(
                    f"sigma_plus = {math.exp(value):.6g} < 1: query objective is not monotone"
                )
            logger.debug(f"Clamped log sigma_plus {value:.3g} to 0")
            value = 0.0
        object.__setattr__(self, "log_sigma_plus", value)

    @classmethod
    def from_sigma(cls, posterior: Pmf, sigma: SigmaEstimates) -> "QueryObjective":
        return cls(posterior=posterior, log_sigma_plus=sigma.log_sigma_plus)

    def gains(self, pool: CandidatePool) -> np.ndarray:
        """Discrete derivative of every candidate in the pool."""
        return self.log_sigma_plus * (pool.incidence @ self.posterior.weights)


def c_plus(x: int, v: int, sequence: SequenceSpec) -> int:
    """Number of trials containing both x and v."""
    return sum(1 for trial in sequence if x in trial and v in trial)


def c_minus(x: int, v: int, sequence: SequenceSpec) -> int:
    """Number of trials containing v but not x."""
    return sum(1 for trial in sequence if v in trial and x not in trial)


def q_value(obj: QueryObjective, sequence: SequenceSpec) -> float:
    if len(sequence) == 0:
        return 0.0
    counts = sequence.appearance_counts(len(obj.posterior))
    return obj.log_sigma_plus * float(counts @ obj.posterior.weights)


def discrete_derivative(obj: QueryObjective, selected: SequenceSpec, candidate: Trial) -> float:
    """
    Q(selected + candidate) - Q(selected).

    Raises:
        ValueError: if the candidate is already part of the selection
    """
    if candidate in selected.trials:
        raise ValueError(f"Trial {candidate.members} is already selected")
    return obj.log_sigma_plus * float(obj.posterior.weights[list(candidate.members)].sum())


def _weighted_log(counts: np.ndarray, log_sigma: float) -> np.ndarray:
    # 0 * log(0) counts as 0
    return np.where(counts == 0, 0.0, counts * log_sigma)


def g_hat(
    posterior: Pmf, sigma: SigmaEstimates, sequence: SequenceSpec, hypothesized_target: int
) -> float:
    """
    Point estimate of the posterior of a hypothesized target after the sequence:

        Pi(x) s+^c+(x,x) / sum_v Pi(v) s+^c+(x,v) s-^c-(x,v)

    evaluated in log space.
    """
    n = len(posterior)
    x = hypothesized_target
    if not 0 <= x < n:
        raise ValueError(f"Symbol {x} outside vocabulary of size {n}")
    if posterior[x] == 0:
        return 0.0
    with np.errstate(divide="ignore"):
        log_pi = np.log(posterior.weights)
        log_plus = math.log(sigma.sigma_plus) if sigma.sigma_plus > 0 else -math.inf
        log_minus = math.log(sigma.sigma_minus) if sigma.sigma_minus > 0 else -math.inf
    if len(sequence) == 0:
        return float(posterior[x])

    incidence = sequence.incidence(n)
    has_x = incidence[:, x]
    plus_counts = has_x @ incidence
    minus_counts = (1.0 - has_x) @ incidence
    log_terms = (
        log_pi + _weighted_log(plus_counts, log_plus) + _weighted_log(minus_counts, log_minus)
    )
    return float(np.exp(log_terms[x] - logsumexp(log_terms)))


def monte_carlo_target_posterior(
    posterior: Pmf,
    sequence: SequenceSpec,
    model: EvidenceModel,
    target: int,
    rng: np.random.Generator,
    draws: int = 2000,
) -> float:
    """
    Mean posterior of `target` after presenting `sequence` to a user who
    attends `target`, over `draws` simulated evidence sets.
    """
    n = len(posterior)
    if len(sequence) == 0:
        return float(posterior[target])
    incidence = sequence.incidence(n)
    labels = np.tile(incidence[:, target].astype(int), (draws, 1))
    evidence = model.sample(labels, rng)
    log_ratios = model.log_likelihood_ratio(evidence)
    with np.errstate(divide="ignore"):
        log_w = np.log(posterior.weights) + log_ratios @ incidence
    log_post = log_w - logsumexp(log_w, axis=1, keepdims=True)
    return float(np.exp(log_post[:, target]).mean())

