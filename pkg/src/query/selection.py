"""
Sequence selection over a candidate pool.

greedy_select is exact for the modular objective: each step adds the
feasible candidate with the largest discrete derivative. random_sequence
is the non-adaptive baseline. exhaustive_select enumerates every feasible
subset and exists to check the greedy result on small instances.
"""

import itertools
import logging

import numpy as np

from src.core.exceptions import InfeasibleQueryError
from src.core.models import SequenceSpec

from .objective import CandidatePool, QueryObjective

logger = logging.getLogger(__name__)


def _budget_error(pool: CandidatePool, picked: int) -> InfeasibleQueryError:
    return InfeasibleQueryError(
        f"Only {picked} of {pool.selection_size} trials fit the per-symbol budget "
        f"of {pool.per_symbol_budget} in a pool of {len(pool)}",
        constraint=f"per_symbol_budget={pool.per_symbol_budget}",
    )


def _feasible(pool: CandidatePool, counts: np.ndarray, available: np.ndarray) -> np.ndarray:
    within_budget = np.all(pool.incidence + counts <= pool.per_symbol_budget, axis=1)
    return available & within_budget


def greedy_select(obj: QueryObjective, pool: CandidatePool) -> SequenceSpec:
    """
    Select pool.selection_size trials by repeated best discrete derivative.

    Ties go to the lowest candidate index.

    Raises:
        InfeasibleQueryError: if the budget exhausts the pool first
    """
    gains = obj.gains(pool)
    counts = np.zeros(pool.n_symbols)
    available = np.ones(len(pool), dtype=bool)
    chosen: list[int] = []
    for _ in range(pool.selection_size):
        feasible = _feasible(pool, counts, available)
        if not feasible.any():
            raise _budget_error(pool, len(chosen))
        best = int(np.argmax(np.where(feasible, gains, -np.inf)))
        chosen.append(best)
        available[best] = False
        counts += pool.incidence[best]
    logger.debug(f"Greedy selected {len(chosen)} trials, gain {float(gains[chosen].sum()):.4g}")
    return SequenceSpec(tuple(pool.candidates[i] for i in chosen))


def random_sequence(pool: CandidatePool, rng: np.random.Generator) -> SequenceSpec:
    """
    Draw pool.selection_size distinct candidates uniformly, one at a time
    from those still within the budget.

    Raises:
        InfeasibleQueryError: if the budget exhausts the pool first
    """
    counts = np.zeros(pool.n_symbols)
    available = np.ones(len(pool), dtype=bool)
    chosen: list[int] = []
    for _ in range(pool.selection_size):
        feasible = np.flatnonzero(_feasible(pool, counts, available))
        if feasible.size == 0:
            raise _budget_error(pool, len(chosen))
        pick = int(feasible[rng.integers(feasible.size)])
        chosen.append(pick)
        available[pick] = False
        counts += pool.incidence[pick]
    return SequenceSpec(tuple(pool.candidates[i] for i in chosen))


def exhaustive_select(obj: QueryObjective, pool: CandidatePool) -> SequenceSpec:
    """Best feasible subset by enumeration; first in lexicographic order on ties."""
    gains = obj.gains(pool)
    best: tuple[int, ...] | None = None
    best_value = -np.inf
    for combo in itertools.combinations(range(len(pool)), pool.selection_size):
        counts = pool.incidence[list(combo)].sum(axis=0)
        if np.any(counts > pool.per_symbol_budget):
            continue
        value = float(gains[list(combo)].sum())
        if value > best_value:
            best, best_value = combo, value
    if best is None:
        raise _budget_error(pool, 0)
    return SequenceSpec(tuple(pool.candidates[i] for i in best))
