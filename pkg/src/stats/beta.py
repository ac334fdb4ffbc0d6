"""Beta-distribution confidence intervals for proportions such as PPC."""

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

DEFAULT_MASS = 0.90


@dataclass(frozen=True)
class BetaFit:
    """Method-of-moments Beta fit and its central interval."""

    alpha: float
    beta: float
    mean: float
    lo: float
    hi: float
    mass: float = DEFAULT_MASS

    @property
    def degenerate(self) -> bool:
        return not (math.isfinite(self.alpha) and math.isfinite(self.beta))

    def cdf(self, x: float) -> float:
        return float(special.betainc(self.alpha, self.beta, x))


def _quantile(alpha: float, beta: float, q: float) -> float:
    return optimize.bisect(
        lambda x: special.betainc(alpha, beta, x) - q, 0.0, 1.0, xtol=1e-14, rtol=1e-14, maxiter=200
    )


def beta_fit_ci(samples: Sequence[float] | np.ndarray, mass: float = DEFAULT_MASS) -> BetaFit:
    """
    Fit a Beta distribution by moments and return its central `mass` interval.

        alpha = m (m (1 - m) / v - 1),  beta = (1 - m) (m (1 - m) / v - 1)

    with m the sample mean and v the unbiased sample variance. When v is 0
    or at least m (1 - m) no Beta distribution matches and the interval
    collapses to [m, m].
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValueError("beta_fit_ci needs at least 2 samples")
    if np.any((x < 0) | (x > 1)):
        raise ValueError("samples must lie in [0, 1]")
    if not 0.0 < mass < 1.0:
        raise ValueError(f"mass must lie in (0, 1), got {mass}")

    m = float(x.mean())
    v = float(x.var(ddof=1))
    if v <= 0 or v >= m * (1 - m):
        return BetaFit(alpha=math.inf, beta=math.inf, mean=m, lo=m, hi=m, mass=mass)

    common = m * (1 - m) / v - 1
    alpha, beta = m * common, (1 - m) * common
    tail = (1.0 - mass) / 2.0
    return BetaFit(
        alpha=alpha,
        beta=beta,
        mean=m,
        lo=_quantile(alpha, beta, tail),
        hi=_quantile(alpha, beta, 1.0 - tail),
        mass=mass,
    )
