"""Character n-gram language model and copy-phrase pool."""

from .ngram import LmContext, NgramModel, phrase_difficulty, prior, train
from .phrases import (
    DIFFICULTY_LEVELS,
    PhraseEntry,
    bucket_phrases,
    draw_session_phrases,
    load_corpus,
    load_phrase_pool,
    parse_phrase_line,
)

__all__ = [
    # Model
    "LmContext",
    "NgramModel",
    "phrase_difficulty",
    "prior",
    "train",
    # Phrases
    "DIFFICULTY_LEVELS",
    "PhraseEntry",
    "bucket_phrases",
    "draw_session_phrases",
    "load_corpus",
    "load_phrase_pool",
    "parse_phrase_line",
]
