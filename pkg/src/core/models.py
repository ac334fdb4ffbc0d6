"""
Domain types shared by every part of the simulator.

Symbols are indices into a fixed Vocabulary. Probability vectors, trials and
code matrices are all index based, which keeps the Monte-Carlo loops on
plain numpy arrays.
"""

import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import DegeneratePosteriorError

BACKSPACE = "<"
SPACE = "_"
DEFAULT_SYMBOLS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ" + BACKSPACE + SPACE

# Atoms below this value are lifted back after each recursive update
PROBABILITY_FLOOR = 1e-12
PMF_TOLERANCE = 1e-9

_NON_LETTER = re.compile(r"[^A-Z]+")


@dataclass(frozen=True)
class Vocabulary:
    """Ordered symbol set with backspace and space members."""

    symbols: tuple[str, ...] = tuple(DEFAULT_SYMBOLS)

    def __post_init__(self) -> None:
        symbols = tuple(self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if len(set(symbols)) != len(symbols):
            raise ValueError("Vocabulary symbols must be distinct")
        if BACKSPACE not in symbols or SPACE not in symbols:
            raise ValueError(f"Vocabulary must contain '{BACKSPACE}' and '{SPACE}'")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    @classmethod
    def from_string(cls, symbols: str) -> "Vocabulary":
        """Build a vocabulary from a string of single-character symbols."""
        return cls(tuple(symbols))

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol: object) -> bool:
        return symbol in self._index

    @property
    def backspace_index(self) -> int:
        return self._index[BACKSPACE]

    @property
    def space_index(self) -> int:
        return self._index[SPACE]

    def index(self, symbol: str) -> int:
        """Index of a symbol; raises KeyError for symbols outside the vocabulary."""
        return self._index[symbol]

    def encode(self, text: str) -> list[int]:
        """Map already normalized text to symbol indices."""
        try:
            return [self._index[ch] for ch in text]
        except KeyError as e:
            raise ValueError(f"Symbol {e.args[0]!r} is not in the vocabulary") from e

    def decode(self, indices: Iterable[int]) -> str:
        return "".join(self.symbols[i] for i in indices)

    @staticmethod
    def normalize_text(text: str) -> str:
        """Uppercase, map anything outside A-Z to '_', collapse repeated '_'."""
        return _NON_LETTER.sub(SPACE, text.upper())


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function over vocabulary indices."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("Pmf weights must be a nonempty vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("Pmf weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > PMF_TOLERANCE:
            raise ValueError(f"Pmf weights sum to {w.sum():.12g}, expected 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, size: int) -> "Pmf":
        return cls(np.full(size, 1.0 / size))

    def __len__(self) -> int:
        return self.weights.size

    def __getitem__(self, index: int) -> float:
        return float(self.weights[index])

    def argmax(self) -> int:
        """Most probable index; np.argmax returns the lowest index on ties."""
        return int(np.argmax(self.weights))

    def max(self) -> float:
        return float(self.weights.max())


def normalize(weights: Sequence[float] | np.ndarray) -> Pmf:
    """
    Scale nonnegative weights to a Pmf.

    Raises:
        DegeneratePosteriorError: if no weight is positive
    """
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    total = w.sum()
    if total <= 0:
        raise DegeneratePosteriorError("Cannot normalize: all weights are zero")
    return Pmf(w / total)


def apply_floor(probabilities: np.ndarray, floor: float = PROBABILITY_FLOOR) -> np.ndarray:
    """Clamp tiny atoms to the floor and renormalize."""
    p = np.maximum(probabilities, floor)
    return p / p.sum()


@dataclass(frozen=True)
class Trial:
    """A set of symbols flashed together, stored sorted."""

    members: tuple[int, ...]

    def __post_init__(self) -> None:
        members = tuple(int(m) for m in self.members)
        if not members:
            raise ValueError("A trial must contain at least one symbol")
        if len(set(members)) != len(members):
            raise ValueError(f"Duplicate symbols in trial {members}")
        if min(members) < 0:
            raise ValueError("Symbol indices must be nonnegative")
        object.__setattr__(self, "members", tuple(sorted(members)))

    @classmethod
    def of(cls, *members: int) -> "Trial":
        return cls(tuple(members))

    def __contains__(self, symbol: object) -> bool:
        return symbol in self.members

    def __len__(self) -> int:
        return len(self.members)

    def mask(self, n_symbols: int) -> np.ndarray:
        """Boolean membership vector y_x(A) over the vocabulary."""
        if self.members[-1] >= n_symbols:
            raise ValueError(f"Trial {self.members} exceeds vocabulary size {n_symbols}")
        m = np.zeros(n_symbols, dtype=bool)
        m[list(self.members)] = True
        return m


def label(trial: Trial, target: int) -> int:
    """1 if the target is flashed in the trial, else 0."""
    return 1 if target in trial else 0


@dataclass(frozen=True)
class SequenceSpec:
    """Ordered trials making up one query sequence."""

    trials: tuple[Trial, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "trials", tuple(self.trials))

    def __len__(self) -> int:
        return len(self.trials)

    def __iter__(self):
        return iter(self.trials)

    def validate(self, max_trials: int) -> None:
        """Check the presentable-sequence bound 1 <= length <= max_trials."""
        if not 1 <= len(self.trials) <= max_trials:
            raise ValueError(
                f"Sequence length {len(self.trials)} outside [1, {max_trials}]"
            )

    def incidence(self, n_symbols: int) -> np.ndarray:
        """(n_trials, n_symbols) 0/1 matrix of trial membership."""
        matrix = np.zeros((len(self.trials), n_symbols), dtype=float)
        for j, trial in enumerate(self.trials):
            matrix[j, list(trial.members)] = 1.0
        return matrix

    def appearance_counts(self, n_symbols: int) -> np.ndarray:
        """Number of trials containing each symbol."""
        return self.incidence(n_symbols).sum(axis=0)

    def extended(self, trial: Trial) -> "SequenceSpec":
        return SequenceSpec(self.trials + (trial,))


@dataclass
class EpochState:
    """Progress of one character decision."""

    posterior: Pmf
    max_sequences: int
    sequences_shown: int = 0
    evidence_log: list[list[tuple[Trial, float]]] = field(default_factory=list)
    committed: Optional[int] = None

    def record(self, sequence: SequenceSpec, evidence: Sequence[float], posterior: Pmf) -> None:
        """Append one sequence's observations and the updated posterior."""
        if self.sequences_shown >= self.max_sequences:
            raise ValueError("Epoch already used its maximum number of sequences")
        self.evidence_log.append(list(zip(sequence.trials, (float(e) for e in evidence))))
        self.sequences_shown += 1
        self.posterior = posterior

    @property
    def trial_count(self) -> int:
        return sum(len(entry) for entry in self.evidence_log)
