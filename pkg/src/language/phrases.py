"""
Copy-phrase pool: loading, difficulty levels and per-session draws.

A pool line is either a whole phrase or `CONTEXT|MISSING`, where the context
is already typed when the task starts and only the missing words are typed.
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from src.core.models import SPACE, Vocabulary

from .ngram import NgramModel, phrase_difficulty

logger = logging.getLogger(__name__)

DIFFICULTY_LEVELS = 5


@dataclass(frozen=True)
class PhraseEntry:
    """One copy-phrase task template."""

    phrase_id: int
    context: str
    missing: str
    difficulty: float = float("nan")
    level: int = 0  # 1 (easiest) .. 5, 0 until bucketed

    @property
    def goal(self) -> str:
        return self.context + self.missing


def parse_phrase_line(line: str, phrase_id: int) -> PhraseEntry:
    """Normalize one pool line into a PhraseEntry."""
    if "|" in line:
        raw_context, raw_missing = line.split("|", 1)
    else:
        raw_context, raw_missing = "", line
    context = Vocabulary.normalize_text(raw_context).strip(SPACE)
    missing = Vocabulary.normalize_text(raw_missing).strip(SPACE)
    if not missing:
        raise ValueError(f"Phrase {phrase_id} has nothing left to type: {line!r}")
    if context:
        missing = SPACE + missing
    return PhraseEntry(phrase_id=phrase_id, context=context, missing=missing)


def load_corpus(path: str | Path) -> str:
    """Read a plain-text training corpus."""
    return Path(path).read_text(encoding="utf-8")


def load_phrase_pool(path: str | Path) -> list[PhraseEntry]:
    """
    Read a phrase pool, one phrase per line.

    Blank lines and lines starting with '#' are skipped. Phrase ids are
    assigned in file order.
    """
    entries: list[PhraseEntry] = []
    with open(path, encoding="utf-8") as f:
        for raw in f:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            entries.append(parse_phrase_line(line, phrase_id=len(entries)))
    logger.info(f"Loaded {len(entries)} phrases from {path}")
    return entries


def bucket_phrases(
    model: NgramModel,
    entries: list[PhraseEntry],
    levels: int = DIFFICULTY_LEVELS,
) -> dict[int, list[PhraseEntry]]:
    """
    Score phrases and split them into equal-count difficulty levels.

    Level 1 holds the phrases the model finds most predictable.
    """
    if len(entries) < levels:
        raise ValueError(f"Need at least {levels} phrases to form {levels} levels")
    scored = [
        replace(e, difficulty=phrase_difficulty(model, e.missing, context=e.context))
        for e in entries
    ]
    ordered = sorted(scored, key=lambda e: (e.difficulty, e.phrase_id))
    buckets: dict[int, list[PhraseEntry]] = {}
    for level, chunk in enumerate(np.array_split(np.arange(len(ordered)), levels), start=1):
        buckets[level] = [replace(ordered[i], level=level) for i in chunk]
    return buckets


def draw_session_phrases(
    buckets: dict[int, list[PhraseEntry]],
    per_level: int,
    rng: np.random.Generator,
) -> list[PhraseEntry]:
    """Draw `per_level` distinct phrases from every level, ordered by level."""
    session: list[PhraseEntry] = []
    for level in sorted(buckets):
        pool = buckets[level]
        if len(pool) < per_level:
            raise ValueError(f"Level {level} has {len(pool)} phrases, need {per_level}")
        picks = rng.choice(len(pool), size=per_level, replace=False)
        session.extend(pool[i] for i in sorted(picks))
    return session
