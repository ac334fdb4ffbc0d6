"""Active query optimization: the modular objective and sequence selectors."""

from .objective import (
    CandidatePool,
    QueryObjective,
    c_minus,
    c_plus,
    discrete_derivative,
    g_hat,
    monte_carlo_target_posterior,
    q_value,
)
from .selection import exhaustive_select, greedy_select, random_sequence

__all__ = [
    "CandidatePool",
    "QueryObjective",
    "c_minus",
    "c_plus",
    "discrete_derivative",
    "exhaustive_select",
    "g_hat",
    "greedy_select",
    "monte_carlo_target_posterior",
    "q_value",
    "random_sequence",
]
