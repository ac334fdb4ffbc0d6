"""
Character n-gram language model for context priors.

Counts are kept for every order 1..n. The predictive distribution
interpolates the orders whose context was seen in training with a uniform
floor, so every non-backspace symbol keeps positive mass in any context.
"""

import logging
import math
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.models import SPACE, Pmf, Vocabulary

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LmContext:
    """The n-1 most recent typed symbols, left-padded with spaces."""

    history: tuple[int, ...]

    @classmethod
    def from_indices(cls, typed: Sequence[int], order: int, space_index: int) -> "LmContext":
        width = order - 1
        if width == 0:
            return cls(())
        tail = tuple(typed[-width:]) if typed else ()
        return cls((space_index,) * (width - len(tail)) + tail)


class NgramModel:
    """
    Interpolated character n-gram model over a vocabulary.

    Immutable after construction; build it with train().

    Example usage:
        vocab = Vocabulary()
        model = train("the cat sat on the mat", order=3, vocabulary=vocab)
        context = model.context_for("THE_C")
        pmf = prior(model, context, backspace_prob=0.05)
    """

    def __init__(
        self,
        order: int,
        vocabulary: Vocabulary,
        tables: list[dict[tuple[int, ...], np.ndarray]],
        top_weight: float = 0.4,
        decay: float = 0.6,
        uniform_weight: float = 0.01,
    ):
        if order < 1 or len(tables) != order:
            raise ValueError("order must be >= 1 with one count table per order")
        self.order = order
        self.vocabulary = vocabulary
        self.top_weight = top_weight
        self.decay = decay
        self.uniform_weight = uniform_weight
        self._tables = tables

        support = np.ones(len(vocabulary))
        support[vocabulary.backspace_index] = 0.0
        self._uniform = support / support.sum()

    def context_for(self, typed: str | Sequence[int]) -> LmContext:
        """Context from typed text or typed symbol indices."""
        indices = self.vocabulary.encode(typed) if isinstance(typed, str) else list(typed)
        return LmContext.from_indices(indices, self.order, self.vocabulary.space_index)

    def ml_distribution(self, context: LmContext, order: int) -> Optional[np.ndarray]:
        """
        Unsmoothed relative frequencies at one order.

        Returns:
            Distribution over the vocabulary, or None if the context never occurred
        """
        if not 1 <= order <= self.order:
            raise ValueError(f"order must lie in [1, {self.order}]")
        history = context.history
        key = history[len(history) - (order - 1):] if order > 1 else ()
        counts = self._tables[order - 1].get(key)
        if counts is None:
            return None
        return counts / counts.sum()

    def distribution(self, context: LmContext) -> np.ndarray:
        """Smoothed predictive distribution; backspace gets zero mass."""
        if len(context.history) != self.order - 1:
            raise ValueError(
                f"context must hold {self.order - 1} symbols, got {len(context.history)}"
            )
        available = []
        for k in range(self.order, 0, -1):
            dist = self.ml_distribution(context, k)
            if dist is not None:
                available.append(dist)

        budget = 1.0 - self.uniform_weight
        upper = [self.top_weight * self.decay**i for i in range(len(available) - 1)]
        total = sum(upper)
        if total > budget:
            upper = [w * budget / total for w in upper]
            total = budget

        mixed = self.uniform_weight * self._uniform
        for weight, dist in zip(upper, available[:-1]):
            mixed = mixed + weight * dist
        mixed = mixed + (budget - total) * available[-1]
        return mixed / mixed.sum()


def train(
    corpus_text: str,
    order: int,
    vocabulary: Optional[Vocabulary] = None,
    top_weight: float = 0.4,
    decay: float = 0.6,
    uniform_weight: float = 0.01,
) -> NgramModel:
    """
    Count n-grams of every order up to `order` over normalized text.

    Normalization uppercases, maps anything outside A-Z to '_' and collapses
    runs of '_'. The stream is left-padded with order-1 spaces.

    Raises:
        ValueError: for order < 1 or a corpus that normalizes to nothing
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    vocabulary = vocabulary or Vocabulary()
    text = Vocabulary.normalize_text(corpus_text).strip(SPACE)
    if not text:
        raise ValueError("Corpus is empty after normalization")

    symbols = vocabulary.encode(text)
    padded = [vocabulary.space_index] * (order - 1) + symbols
    size = len(vocabulary)

    tables: list[dict[tuple[int, ...], np.ndarray]] = []
    for k in range(1, order + 1):
        counter: Counter = Counter()
        for pos in range(order - 1, len(padded)):
            counter[(tuple(padded[pos - k + 1:pos]), padded[pos])] += 1
        table: dict[tuple[int, ...], np.ndarray] = {}
        for (ctx, sym), count in counter.items():
            row = table.get(ctx)
            if row is None:
                row = table[ctx] = np.zeros(size)
            row[sym] += count
        tables.append(table)

    logger.info(
        f"Trained order-{order} model on {len(symbols)} symbols "
        f"({sum(len(t) for t in tables)} contexts)"
    )
    return NgramModel(order, vocabulary, tables, top_weight, decay, uniform_weight)


def prior(model: NgramModel, context: LmContext, backspace_prob: float) -> Pmf:
    """
    Context prior with a fixed backspace probability spliced in.

    P('<') = backspace_prob; the other symbols share 1 - backspace_prob
    in proportion to the smoothed n-gram distribution.
    """
    if not 0.0 <= backspace_prob < 1.0:
        raise ValueError(f"backspace_prob must lie in [0, 1), got {backspace_prob}")
    weights = model.distribution(context) * (1.0 - backspace_prob)
    weights[model.vocabulary.backspace_index] = backspace_prob
    return Pmf(weights / weights.sum())


def phrase_difficulty(model: NgramModel, phrase: str, context: str = "") -> float:
    """
    Mean negative log probability of the phrase under the model, left to right.

    Args:
        model: Trained model
        phrase: Normalized phrase text (no backspace)
        context: Text typed before the phrase, conditioning its first symbols

    Returns:
        Difficulty; 0 for a phrase the model predicts with certainty
    """
    if not phrase:
        raise ValueError("phrase must be nonempty")
    vocab = model.vocabulary
    symbols = vocab.encode(phrase)
    if vocab.backspace_index in symbols:
        raise ValueError("phrase must not contain the backspace symbol")
    typed = vocab.encode(context)
    total = 0.0
    for sym in symbols:
        pmf = prior(model, model.context_for(typed), backspace_prob=0.0)
        p = pmf[sym]
        total += -math.log(p) if p > 0 else math.inf
        typed.append(sym)
    return total / len(symbols)
