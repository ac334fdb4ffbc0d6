"""Wilcoxon signed-rank test for paired samples."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import stats

from src.core.exceptions import StatisticsError

logger = logging.getLogger(__name__)

EXACT_MAX_N = 20
MIN_NONZERO = 5


@dataclass(frozen=True)
class WilcoxonResult:
    """
    Signed-rank test outcome.

    statistic is min(W+, W-). p_greater tests a > b, p_less tests a < b.
    """

    statistic: float
    w_plus: float
    w_minus: float
    n: int
    p_two_sided: float
    p_greater: float
    p_less: float
    method: str

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "w_plus": self.w_plus,
            "w_minus": self.w_minus,
            "n": self.n,
            "p_two_sided": self.p_two_sided,
            "p_greater": self.p_greater,
            "p_less": self.p_less,
            "method": self.method,
        }


def _exact_tails(doubled_ranks: np.ndarray, observed: int) -> tuple[float, float]:
    """
    P(W+ >= observed) and P(W+ <= observed) over all 2^n sign patterns.

    Works on doubled ranks, which are integers even with tied (average) ranks.
    """
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r in doubled_ranks.astype(int):
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    probs = counts / counts.sum()
    return float(probs[observed:].sum()), float(probs[: observed + 1].sum())


def _normal_tails(ranks: np.ndarray, w_plus: float) -> tuple[float, float]:
    n = ranks.size
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float((tie_counts**3 - tie_counts).sum()) / 48.0
    sd = math.sqrt(var)
    p_greater = float(stats.norm.sf((w_plus - mean - 0.5) / sd))
    p_less = float(stats.norm.cdf((w_plus - mean + 0.5) / sd))
    return p_greater, p_less


def wilcoxon_signed_rank(
    paired_a: Sequence[float] | np.ndarray,
    paired_b: Sequence[float] | np.ndarray,
    method: str = "auto",
) -> WilcoxonResult:
    """
    Paired signed-rank test on a - b.

    Zero differences are dropped; tied magnitudes get average ranks. The
    null distribution is enumerated exactly for n <= 20 and approximated
    by a tie-corrected normal with continuity correction above that.

    Args:
        paired_a: First sample
        paired_b: Second sample, same length
        method: "auto", "exact" or "normal"

    Raises:
        StatisticsError: fewer than 5 nonzero differences (including all zero)
    """
    a = np.asarray(paired_a, dtype=float)
    b = np.asarray(paired_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(
            f"paired samples must be equal-length vectors, got {a.shape} and {b.shape}"
        )
    if method not in ("auto", "exact", "normal"):
        raise ValueError(f"Unknown method {method!r}")

    diffs = a - b
    diffs = diffs[diffs != 0]
    n = diffs.size
    if n < a.size:
        logger.debug(f"Dropped {a.size - n} zero differences of {a.size}")
    if n == 0:
        raise StatisticsError("All paired differences are zero; no test possible")
    if n < MIN_NONZERO:
        raise StatisticsError(f"Only {n} nonzero paired differences, need at least {MIN_NONZERO}")

    ranks = stats.rankdata(np.abs(diffs))
    w_plus = float(ranks[diffs > 0].sum())
    w_minus = float(ranks[diffs < 0].sum())

    use_exact = method == "exact" or (method == "auto" and n <= EXACT_MAX_N)
    if use_exact:
        p_greater, p_less = _exact_tails(np.rint(2 * ranks), int(round(2 * w_plus)))
    else:
        p_greater, p_less = _normal_tails(ranks, w_plus)

    return WilcoxonResult(
        statistic=min(w_plus, w_minus),
        w_plus=w_plus,
        w_minus=w_minus,
        n=n,
        p_two_sided=min(1.0, 2.0 * min(p_greater, p_less)),
        p_greater=min(1.0, p_greater),
        p_less=min(1.0, p_less),
        method="exact" if use_exact else "normal",
    )
