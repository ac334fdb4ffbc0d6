"""
Copy-phrase typing with a simulated user.

The user always attends the correct next symbol: the next goal character
while everything typed so far is correct, otherwise backspace. Each epoch
fuses the language-model prior for the typed context with evidence from
the arm's query source and commits one symbol.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.config import SimConfig
from src.core.models import SequenceSpec, label
from src.evidence.density import EvidenceModel
from src.inference.rbse import DecisionConfig, QuerySource, run_epoch
from src.language.ngram import NgramModel, prior

logger = logging.getLogger(__name__)

FAILURE_ERRORS = "consecutive_errors"
FAILURE_TIME = "time_budget"


@dataclass(frozen=True, eq=False)
class SimulatedUser:
    """A user whose per-trial evidence follows `model`, which the decoder also fuses with."""

    user_id: int
    model: EvidenceModel
    auc: float

    @staticmethod
    def intent(typed: list[int], goal: list[int], backspace_index: int) -> Optional[int]:
        """
        Symbol the user attends next, or None when the goal is typed.

        Example usage:
            SimulatedUser.intent([0, 1], [0, 1, 2], backspace_index=26)  # -> 2
            SimulatedUser.intent([0, 5], [0, 1, 2], backspace_index=26)  # -> 26
        """
        if typed == goal:
            return None
        if len(typed) < len(goal) and goal[: len(typed)] == typed:
            return goal[len(typed)]
        return backspace_index


@dataclass
class UserEvidenceSource:
    """Evidence a user produces while attending `target`."""

    model: EvidenceModel
    target: int
    rng: np.random.Generator

    def observe(self, sequence: SequenceSpec) -> np.ndarray:
        labels = np.array([label(trial, self.target) for trial in sequence], dtype=int)
        return self.model.sample(labels, self.rng)


@dataclass(frozen=True)
class PhraseTask:
    """Goal text with a pre-typed context; the user types the rest."""

    phrase_id: int
    level: int
    context: str
    goal: str
    time_budget_ms: float = 300_000.0
    max_consecutive_errors: int = 5

    def __post_init__(self) -> None:
        if not self.goal.startswith(self.context):
            raise ValueError(f"Goal {self.goal!r} does not start with context {self.context!r}")


@dataclass
class PhraseRecord:
    """Outcome of one phrase."""

    phrase_id: int
    level: int
    completed: bool = False
    elapsed_ms: float = 0.0
    epochs: int = 0
    sequences: int = 0
    trials: int = 0
    typed: str = ""
    failure: Optional[str] = None
    epoch_ms: list[float] = field(default_factory=list, repr=False)


def epoch_timing(sequences: int, trials_total: int, config: SimConfig) -> float:
    """Simulated duration of one epoch in milliseconds."""
    if sequences < 0 or trials_total < 0:
        raise ValueError("sequence and trial counts must be nonnegative")
    return (
        trials_total * config.iti_ms
        + sequences * config.inter_sequence_pause_ms
        + config.post_decision_pause_ms
    )


def type_phrase(
    task: PhraseTask,
    user: SimulatedUser,
    query_source: QuerySource,
    lm: NgramModel,
    config: SimConfig,
    backspace_prob: float,
    rng: np.random.Generator,
    max_trials: Optional[int] = None,
) -> PhraseRecord:
    """
    Type one phrase epoch by epoch.

    Stops when the typed text equals the goal, after more than
    task.max_consecutive_errors wrong commits in a row, or once the elapsed
    simulated time exceeds the task budget.

    Args:
        task: Phrase to type
        user: Simulated user producing the evidence
        query_source: Arm policy choosing each sequence
        lm: Language model supplying the context prior
        config: Timing and decision constants
        backspace_prob: Prior mass spliced in for backspace
        rng: Evidence stream for this phrase
        max_trials: Longest sequence the arm presents; the vocabulary size by default

    Returns:
        PhraseRecord with counts, elapsed time and the final typed text
    """
    vocab = lm.vocabulary
    decision = DecisionConfig(config.confidence_threshold, config.max_sequences, max_trials)
    typed = vocab.encode(task.context)
    goal = vocab.encode(task.goal)
    record = PhraseRecord(phrase_id=task.phrase_id, level=task.level)
    consecutive_errors = 0

    while True:
        target = SimulatedUser.intent(typed, goal, vocab.backspace_index)
        if target is None:
            record.completed = True
            break

        context_prior = prior(lm, lm.context_for(typed), backspace_prob)
        result = run_epoch(
            context_prior,
            query_source,
            UserEvidenceSource(user.model, target, rng),
            decision,
            user.model,
        )
        duration = epoch_timing(result.sequences_used, result.trial_count, config)
        record.epoch_ms.append(duration)
        record.elapsed_ms += duration
        record.epochs += 1
        record.sequences += result.sequences_used
        record.trials += result.trial_count

        if result.decision == vocab.backspace_index:
            if typed:
                typed.pop()
        else:
            typed.append(result.decision)
        consecutive_errors = 0 if result.decision == target else consecutive_errors + 1

        if record.elapsed_ms > task.time_budget_ms:
            record.failure = FAILURE_TIME
            break
        if consecutive_errors > task.max_consecutive_errors:
            record.failure = FAILURE_ERRORS
            break

    record.typed = vocab.decode(typed)
    logger.debug(
        f"Phrase {task.phrase_id}: completed={record.completed} after {record.epochs} epochs "
        f"({record.elapsed_ms / 1000:.1f} s)"
    )
    return record
