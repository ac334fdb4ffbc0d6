"""
Class-conditional densities over scalar evidence scores.

Two backends share one interface: a parametric Gaussian (used for users
swept by target AUC) and a Gaussian-kernel KDE (used for users calibrated
from synthetic feature data). An EvidenceModel pairs a target and a
non-target density and provides likelihood ratios, sampling and the
expected-likelihood-ratio point estimates that drive query selection.
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from scipy import stats
from scipy.integrate import trapezoid
from scipy.special import logsumexp

from src.core.exceptions import EvidenceModelError

logger = logging.getLogger(__name__)

DENSITY_FLOOR = 1e-300
LOG_DENSITY_FLOOR = math.log(DENSITY_FLOOR)
DEFAULT_QUADRATURE_POINTS = 4096

# Gaussian grids extend this many standard deviations past the mean
_GAUSSIAN_SPAN = 8.0
# KDE grids extend this many bandwidths past the outermost kernel centers
_KDE_SPAN = 5.0


@dataclass(frozen=True)
class GaussianDensity:
    """Normal density N(mean, std^2)."""

    mean: float
    std: float = 1.0

    def __post_init__(self) -> None:
        if not self.std > 0:
            raise EvidenceModelError(f"Gaussian std must be positive, got {self.std}")

    def logpdf(self, x: np.ndarray | float) -> np.ndarray:
        return stats.norm.logpdf(x, loc=self.mean, scale=self.std)

    def pdf(self, x: np.ndarray | float) -> np.ndarray:
        return stats.norm.pdf(x, loc=self.mean, scale=self.std)

    def cdf(self, x: np.ndarray | float) -> np.ndarray:
        return stats.norm.cdf(x, loc=self.mean, scale=self.std)

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray | float:
        return rng.normal(self.mean, self.std, size=size)

    def span(self) -> tuple[float, float]:
        return self.mean - _GAUSSIAN_SPAN * self.std, self.mean + _GAUSSIAN_SPAN * self.std

    def to_dict(self) -> dict:
        return {"kind": "gaussian", "mean": self.mean, "std": self.std}


@dataclass(frozen=True, eq=False)
class KernelDensity:
    """Gaussian-kernel density estimate with a fixed bandwidth."""

    centers: np.ndarray
    bandwidth: float

    def __post_init__(self) -> None:
        centers = np.asarray(self.centers, dtype=float).ravel()
        if centers.size == 0:
            raise EvidenceModelError("KDE needs at least one kernel center")
        if not self.bandwidth > 0:
            raise EvidenceModelError(f"KDE bandwidth must be positive, got {self.bandwidth}")
        centers.setflags(write=False)
        object.__setattr__(self, "centers", centers)

    def logpdf(self, x: np.ndarray | float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        z = (x.reshape(-1, 1) - self.centers) / self.bandwidth
        log_k = stats.norm.logpdf(z) - math.log(self.bandwidth)
        out = logsumexp(log_k, axis=1) - math.log(self.centers.size)
        return out.reshape(x.shape)

    def pdf(self, x: np.ndarray | float) -> np.ndarray:
        return np.exp(self.logpdf(x))

    def cdf(self, x: np.ndarray | float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        z = (x.reshape(-1, 1) - self.centers) / self.bandwidth
        return stats.norm.cdf(z).mean(axis=1).reshape(x.shape)

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray | float:
        """Pick a kernel center uniformly, then add kernel noise."""
        picks = rng.integers(self.centers.size, size=size)
        return self.centers[picks] + self.bandwidth * rng.standard_normal(size=size)

    def span(self) -> tuple[float, float]:
        return (
            float(self.centers.min()) - _KDE_SPAN * self.bandwidth,
            float(self.centers.max()) + _KDE_SPAN * self.bandwidth,
        )

    def to_dict(self) -> dict:
        return {
            "kind": "kde",
            "bandwidth": self.bandwidth,
            "centers": [float(c) for c in self.centers],
        }


Density = Union[GaussianDensity, KernelDensity]


def density_from_dict(data: dict) -> Density:
    kind = data.get("kind")
    if kind == "gaussian":
        return GaussianDensity(mean=float(data["mean"]), std=float(data["std"]))
    if kind == "kde":
        return KernelDensity(
            centers=np.asarray(data["centers"]), bandwidth=float(data["bandwidth"])
        )
    raise EvidenceModelError(f"Unknown density kind: {kind!r}")


def silverman_bandwidth(scores: np.ndarray) -> float:
    """
    Silverman's rule of thumb:
        h = 0.9 * min(sd, IQR / 1.34) * n^(-1/5)
    """
    x = np.asarray(scores, dtype=float)
    sd = np.std(x, ddof=1)
    iqr = np.subtract(*np.percentile(x, [75, 25]))
    return float(0.9 * min(sd, iqr / 1.34) * x.size ** (-1 / 5))


def kde_fit(scores: np.ndarray) -> KernelDensity:
    """
    Gaussian-kernel KDE with Silverman bandwidth.

    Falls back to 1e-3 * (1 + |mean|) when the rule gives zero
    (for example when every score is identical).
    """
    x = np.asarray(scores, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("kde_fit needs at least 2 scores")
    bandwidth = silverman_bandwidth(x)
    if not bandwidth > 0:
        bandwidth = 1e-3 * (1.0 + abs(float(x.mean())))
        logger.debug(f"Silverman bandwidth degenerate, falling back to {bandwidth:.3g}")
    return KernelDensity(centers=x, bandwidth=bandwidth)


@dataclass(frozen=True)
class SigmaEstimates:
    """Expected likelihood ratios under the target and non-target classes."""

    sigma_plus: float
    sigma_minus: float

    @property
    def log_sigma_plus(self) -> float:
        return math.log(self.sigma_plus)

    def to_dict(self) -> dict:
        return {"sigma_plus": self.sigma_plus, "sigma_minus": self.sigma_minus}


@dataclass(frozen=True, eq=False)
class EvidenceModel:
    """Target (label 1) and non-target (label 0) evidence densities."""

    target: Density
    nontarget: Density
    quadrature_points: int = DEFAULT_QUADRATURE_POINTS

    def __post_init__(self) -> None:
        if self.quadrature_points < 2048:
            raise EvidenceModelError("quadrature_points must be >= 2048")

    def density(self, label: int) -> Density:
        if label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {label}")
        return self.target if label == 1 else self.nontarget

    def log_likelihood_ratio(self, evidence: np.ndarray | float) -> np.ndarray:
        """log p(e|1) - log p(e|0), with both densities clamped at 1e-300."""
        log_1 = np.maximum(self.target.logpdf(evidence), LOG_DENSITY_FLOOR)
        log_0 = np.maximum(self.nontarget.logpdf(evidence), LOG_DENSITY_FLOOR)
        return log_1 - log_0

    def sample(self, labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """One evidence draw per label, label-conditionally independent."""
        labels = np.asarray(labels, dtype=int)
        out = np.empty(labels.shape, dtype=float)
        hits = labels == 1
        n_hits = int(hits.sum())
        if n_hits:
            out[hits] = self.target.sample(rng, size=n_hits)
        if n_hits < labels.size:
            out[~hits] = self.nontarget.sample(rng, size=labels.size - n_hits)
        return out

    def grid(self) -> np.ndarray:
        """Quadrature grid covering both densities."""
        lo_1, hi_1 = self.target.span()
        lo_0, hi_0 = self.nontarget.span()
        return np.linspace(min(lo_1, lo_0), max(hi_1, hi_0), self.quadrature_points)

    @property
    def analytic_auc(self) -> Optional[float]:
        """Closed-form AUC for a Gaussian pair, None for KDE models."""
        if isinstance(self.target, GaussianDensity) and isinstance(self.nontarget, GaussianDensity):
            scale = math.hypot(self.target.std, self.nontarget.std)
            return float(stats.norm.cdf((self.target.mean - self.nontarget.mean) / scale))
        return None

    def to_dict(self) -> dict:
        return {
            "target": self.target.to_dict(),
            "nontarget": self.nontarget.to_dict(),
            "quadrature_points": self.quadrature_points,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvidenceModel":
        try:
            return cls(
                target=density_from_dict(data["target"]),
                nontarget=density_from_dict(data["nontarget"]),
                quadrature_points=int(data.get("quadrature_points", DEFAULT_QUADRATURE_POINTS)),
            )
        except KeyError as e:
            raise EvidenceModelError(f"Evidence model document missing {e}") from e


def gaussian_evidence_model(
    auc_target: float, quadrature_points: int = DEFAULT_QUADRATURE_POINTS
) -> EvidenceModel:
    """
    Unit-variance Gaussians at +-d/2 whose analytic AUC equals auc_target.

    d = sqrt(2) * Phi^-1(auc_target)
    """
    if not 0.5 <= auc_target < 1.0:
        raise ValueError(f"auc_target must lie in [0.5, 1), got {auc_target}")
    d = math.sqrt(2.0) * float(stats.norm.ppf(auc_target))
    return EvidenceModel(
        target=GaussianDensity(mean=d / 2.0),
        nontarget=GaussianDensity(mean=-d / 2.0),
        quadrature_points=quadrature_points,
    )


def separation_for_auc(auc_target: float) -> float:
    """Mean separation d of the unit-variance pair with the given AUC."""
    return math.sqrt(2.0) * float(stats.norm.ppf(auc_target))


def sigma_point_estimates(model: EvidenceModel) -> SigmaEstimates:
    """
    Trapezoid-rule estimates of

        sigma_plus  = E_{e|1}[p(e|1) / p(e|0)]
        sigma_minus = E_{e|0}[p(e|1) / p(e|0)]

    on the model's quadrature grid.
    """
    x = model.grid()
    log_1 = np.maximum(model.target.logpdf(x), LOG_DENSITY_FLOOR)
    log_0 = np.maximum(model.nontarget.logpdf(x), LOG_DENSITY_FLOOR)
    log_ratio = log_1 - log_0
    sigma_plus = float(trapezoid(np.exp(log_1 + log_ratio), x))
    sigma_minus = float(trapezoid(np.exp(log_0 + log_ratio), x))
    if not (math.isfinite(sigma_plus) and math.isfinite(sigma_minus)):
        raise EvidenceModelError("Expected likelihood ratio is not finite")
    if sigma_plus < 1.0:
        logger.warning(f"sigma_plus = {sigma_plus:.6g} < 1: classes are not separated")
    if sigma_minus >= 1.0:
        logger.debug(f"sigma_minus = {sigma_minus:.6g} is not below 1")
    return SigmaEstimates(sigma_plus=sigma_plus, sigma_minus=sigma_minus)


def sample_evidence(model: EvidenceModel, label: int, rng: np.random.Generator) -> float:
    """Draw one evidence score from the density of the given label."""
    return float(model.density(label).sample(rng))


def save_evidence_model(
    model: EvidenceModel, path: str | Path, metadata: Optional[dict[str, Any]] = None
) -> None:
    """Write a model document: densities plus caller metadata (AUC, sigma, provenance)."""
    from src.reporting import write_text_atomic

    document = {"model": model.to_dict(), **(metadata or {})}
    write_text_atomic(path, json.dumps(document, indent=2, sort_keys=True) + "\n")


def load_evidence_model(path: str | Path) -> EvidenceModel:
    """Read a model document written by save_evidence_model."""
    try:
        with open(path, encoding="utf-8") as f:
            document = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise EvidenceModelError(f"Cannot read evidence model {path}: {e}") from e
    if "model" not in document:
        raise EvidenceModelError(f"{path} is not an evidence model document")
    return EvidenceModel.from_dict(document["model"])


def evidence_auc(model: EvidenceModel) -> float:
    """
    AUC of the model's score distributions: closed form for a Gaussian
    pair, otherwise the integral of F0(e) p(e|1) on the quadrature grid.
    """
    analytic = model.analytic_auc
    if analytic is not None:
        return analytic
    x = model.grid()
    return float(trapezoid(model.nontarget.cdf(x) * model.target.pdf(x), x))
