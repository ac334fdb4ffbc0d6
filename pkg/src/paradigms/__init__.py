"""Presentation paradigms: code matrices, candidate pools and arm query sources."""

from .arms import (
    BASELINE_OF,
    ArmSpec,
    CodebookQuerySource,
    FixedQuerySource,
    GreedyQuerySource,
    Paradigm,
    RandomQuerySource,
    build_query_source,
    validate_arm,
)
from .codes import (
    CodeMatrix,
    alp_codeword_pool,
    alp_pool_from_posterior,
    rcp_matrix,
    singleton_pool,
)

__all__ = [
    "BASELINE_OF",
    "ArmSpec",
    "CodeMatrix",
    "CodebookQuerySource",
    "FixedQuerySource",
    "GreedyQuerySource",
    "Paradigm",
    "RandomQuerySource",
    "alp_codeword_pool",
    "alp_pool_from_posterior",
    "build_query_source",
    "rcp_matrix",
    "singleton_pool",
    "validate_arm",
]
