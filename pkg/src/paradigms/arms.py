"""
Experiment arms: a presentation paradigm plus its query policy.

Active arms (arsvp, ascp, alp) choose each sequence by maximizing the query
objective under the current posterior. Baselines (rsvp_random, scp, rcp)
present random or fixed sequences. Every source shuffles the presentation
order of the trials it selects.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np

from src.core.exceptions import ConfigError, InfeasibleQueryError
from src.core.models import Pmf, SequenceSpec, Vocabulary
from src.inference.rbse import QuerySource
from src.query.objective import CandidatePool, QueryObjective
from src.query.selection import greedy_select, random_sequence

from .codes import (
    ALP_CODEWORD_LENGTH,
    ALP_MAX_WEIGHT,
    RCP_GRID,
    alp_pool_from_posterior,
    rcp_matrix,
    singleton_pool,
)

logger = logging.getLogger(__name__)


class Paradigm(str, Enum):
    """Presentation paradigm and query policy of an arm."""

    RSVP_RANDOM = "rsvp_random"
    ARSVP = "arsvp"
    SCP = "scp"
    ASCP = "ascp"
    RCP = "rcp"
    ALP = "alp"

    @property
    def active(self) -> bool:
        return self in (Paradigm.ARSVP, Paradigm.ASCP, Paradigm.ALP)


# Active paradigm -> the baseline it is compared against
BASELINE_OF = {
    Paradigm.ARSVP: Paradigm.RSVP_RANDOM,
    Paradigm.ASCP: Paradigm.SCP,
    Paradigm.ALP: Paradigm.RCP,
}

_ARM_KEYS = {"name", "paradigm", "trials_per_sequence", "grid", "codeword_length", "max_weight"}


@dataclass(frozen=True)
class ArmSpec:
    """
    One arm of a study.

    trials_per_sequence applies to the singleton paradigms and defaults to
    the configured N_t (scp always flashes the whole vocabulary). grid is
    used by rcp, codeword_length and max_weight by alp.
    """

    name: str
    paradigm: Paradigm
    trials_per_sequence: Optional[int] = None
    grid: tuple[int, int] = RCP_GRID
    codeword_length: int = ALP_CODEWORD_LENGTH
    max_weight: int = ALP_MAX_WEIGHT

    def __post_init__(self) -> None:
        if not self.name:
            raise ConfigError("Arm name must be nonempty", key="name")
        try:
            object.__setattr__(self, "paradigm", Paradigm(self.paradigm))
        except ValueError as e:
            raise ConfigError(f"Unknown paradigm {self.paradigm!r}", key="paradigm") from e
        object.__setattr__(self, "grid", tuple(self.grid))
        if len(self.grid) != 2:
            raise ConfigError(f"grid must be [rows, cols], got {list(self.grid)}", key="grid")

    @property
    def active(self) -> bool:
        return self.paradigm.active

    def sequence_length(self, n_symbols: int, default_trials: int) -> int:
        """Trials per sequence this arm presents."""
        if self.paradigm is Paradigm.SCP:
            return n_symbols
        if self.paradigm is Paradigm.RCP:
            return self.grid[0] + self.grid[1]
        if self.paradigm is Paradigm.ALP:
            return self.codeword_length
        return self.trials_per_sequence or default_trials

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "paradigm": self.paradigm.value,
            "trials_per_sequence": self.trials_per_sequence,
            "grid": list(self.grid),
            "codeword_length": self.codeword_length,
            "max_weight": self.max_weight,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ArmSpec":
        unknown = set(data) - _ARM_KEYS
        if unknown:
            raise ConfigError(f"Unknown arm keys: {sorted(unknown)}", key=sorted(unknown)[0])
        for required in ("name", "paradigm"):
            if required not in data:
                raise ConfigError(f"Arm definition missing '{required}'", key=required)
        return cls(
            name=str(data["name"]),
            paradigm=data["paradigm"],
            trials_per_sequence=data.get("trials_per_sequence"),
            grid=tuple(data.get("grid", RCP_GRID)),
            codeword_length=int(data.get("codeword_length", ALP_CODEWORD_LENGTH)),
            max_weight=int(data.get("max_weight", ALP_MAX_WEIGHT)),
        )


@dataclass
class _ShufflingSource:
    rng: np.random.Generator

    def _shuffled(self, sequence: SequenceSpec) -> SequenceSpec:
        order = self.rng.permutation(len(sequence))
        return SequenceSpec(tuple(sequence.trials[i] for i in order))


@dataclass
class GreedyQuerySource(_ShufflingSource):
    """Greedy maximization of the query objective over a fixed pool."""

    pool: CandidatePool = field(kw_only=True)
    log_sigma_plus: float = field(kw_only=True)

    def next_sequence(self, posterior: Pmf) -> SequenceSpec:
        objective = QueryObjective(posterior=posterior, log_sigma_plus=self.log_sigma_plus)
        return self._shuffled(greedy_select(objective, self.pool))


@dataclass
class RandomQuerySource(_ShufflingSource):
    """Uniform random selection from a pool, ignoring the posterior."""

    pool: CandidatePool = field(kw_only=True)

    def next_sequence(self, posterior: Pmf) -> SequenceSpec:
        return random_sequence(self.pool, self.rng)


@dataclass
class FixedQuerySource(_ShufflingSource):
    """The same trials every sequence, in fresh random order."""

    sequence: SequenceSpec = field(kw_only=True)

    def next_sequence(self, posterior: Pmf) -> SequenceSpec:
        return self._shuffled(self.sequence)


@dataclass
class CodebookQuerySource(_ShufflingSource):
    """Posterior-ranked codeword assignment, re-derived for every sequence."""

    log_sigma_plus: float = field(kw_only=True)
    codeword_length: int = field(kw_only=True)
    max_weight: int = field(kw_only=True)

    def next_sequence(self, posterior: Pmf) -> SequenceSpec:
        pool, _ = alp_pool_from_posterior(posterior, self.codeword_length, self.max_weight)
        objective = QueryObjective(posterior=posterior, log_sigma_plus=self.log_sigma_plus)
        return self._shuffled(greedy_select(objective, pool))


def validate_arm(arm: ArmSpec, vocabulary: Vocabulary, default_trials: int) -> None:
    """
    Check that an arm can produce sequences for this vocabulary.

    Raises:
        InfeasibleQueryError: sequence length outside the pool
        CodebookError: grid or codeword settings that cannot cover the vocabulary
    """
    n = len(vocabulary)
    paradigm = arm.paradigm
    if paradigm in (Paradigm.RSVP_RANDOM, Paradigm.ARSVP, Paradigm.ASCP):
        length = arm.sequence_length(n, default_trials)
        if not 1 <= length <= n:
            raise InfeasibleQueryError(
                f"Arm '{arm.name}' asks for {length} singleton trials from {n} symbols",
                constraint="selection_size",
            )
    elif paradigm is Paradigm.SCP:
        if arm.trials_per_sequence not in (None, n):
            raise InfeasibleQueryError(
                f"Arm '{arm.name}': scp flashes all {n} symbols, "
                f"got trials_per_sequence={arm.trials_per_sequence}",
                constraint="selection_size",
            )
    elif paradigm is Paradigm.RCP:
        rcp_matrix(arm.grid[0], arm.grid[1], vocabulary).to_sequence()
    else:
        alp_pool_from_posterior(Pmf.uniform(n), arm.codeword_length, arm.max_weight)


def build_query_source(
    arm: ArmSpec,
    vocabulary: Vocabulary,
    log_sigma_plus: float,
    rng: np.random.Generator,
    default_trials: int,
) -> QuerySource:
    """Query source realizing the arm's paradigm and policy."""
    n = len(vocabulary)
    paradigm = arm.paradigm
    logger.debug(f"Building {paradigm.value} query source for arm '{arm.name}'")
    if paradigm is Paradigm.ARSVP or paradigm is Paradigm.ASCP:
        pool = singleton_pool(n, arm.sequence_length(n, default_trials))
        return GreedyQuerySource(rng, pool=pool, log_sigma_plus=log_sigma_plus)
    if paradigm is Paradigm.RSVP_RANDOM:
        pool = singleton_pool(n, arm.sequence_length(n, default_trials))
        return RandomQuerySource(rng, pool=pool)
    if paradigm is Paradigm.SCP:
        return FixedQuerySource(rng, sequence=SequenceSpec(singleton_pool(n, n).candidates))
    if paradigm is Paradigm.RCP:
        matrix = rcp_matrix(arm.grid[0], arm.grid[1], vocabulary)
        return FixedQuerySource(rng, sequence=matrix.to_sequence())
    return CodebookQuerySource(
        rng,
        log_sigma_plus=log_sigma_plus,
        codeword_length=arm.codeword_length,
        max_weight=arm.max_weight,
    )
