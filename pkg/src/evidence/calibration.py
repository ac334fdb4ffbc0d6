"""
Calibration pipeline: synthetic feature data, regularized discriminant
analysis, cross-validated (lambda, gamma) selection and the KDE evidence
model built from out-of-fold scores.

Example usage:
    data = synth_calibration(dims=40, n_target=100, n_nontarget=900, separation=2.0, seed=7)
    model, report = calibrate_pipeline(data, lambda_grid=[0, 0.5, 1], gamma_grid=[0.1, 0.5])
    print(report.achieved_auc, report.sigma.sigma_plus)
"""

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import linalg, stats

from src.core.exceptions import CalibrationError, SingularCovarianceError

from .density import (
    DEFAULT_QUADRATURE_POINTS,
    EvidenceModel,
    SigmaEstimates,
    kde_fit,
    sigma_point_estimates,
)

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_GRID = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
DEFAULT_GAMMA_GRID = (0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0)
DEFAULT_FOLDS = 10


@dataclass(frozen=True, eq=False)
class CalibrationData:
    """Labeled feature vectors: features (N, m), labels (N,) in {0, 1}."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        features = np.atleast_2d(np.asarray(self.features, dtype=float))
        labels = np.asarray(self.labels, dtype=int).ravel()
        if features.shape[0] != labels.size:
            raise ValueError(f"{features.shape[0]} feature rows but {labels.size} labels")
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def dims(self) -> int:
        return self.features.shape[1]

    @property
    def n_target(self) -> int:
        return int(self.labels.sum())

    @property
    def n_nontarget(self) -> int:
        return int(self.labels.size - self.labels.sum())


def synth_calibration(
    dims: int,
    n_target: int,
    n_nontarget: int,
    separation: float,
    seed: int | np.random.SeedSequence = 0,
) -> CalibrationData:
    """
    Two unit-covariance Gaussian classes whose means differ by a vector of
    norm `separation`, along a random direction.
    """
    if dims < 1:
        raise ValueError(f"dims must be >= 1, got {dims}")
    if n_target < 2 or n_nontarget < 2:
        raise ValueError("each class needs at least 2 samples")
    if separation < 0:
        raise ValueError(f"separation must be nonnegative, got {separation}")

    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(dims)
    direction /= np.linalg.norm(direction)
    offset = direction * (separation / 2.0)

    target = offset + rng.standard_normal((n_target, dims))
    nontarget = -offset + rng.standard_normal((n_nontarget, dims))
    labels = np.concatenate([np.ones(n_target, dtype=int), np.zeros(n_nontarget, dtype=int)])
    return CalibrationData(features=np.vstack([target, nontarget]), labels=labels)


@dataclass(frozen=True)
class _ClassMoments:
    """Per-class sample counts, means and scatter matrices N_k * Sigma_k."""

    counts: np.ndarray  # (2,)
    means: np.ndarray  # (2, m)
    scatters: np.ndarray  # (2, m, m)


def _class_moments(features: np.ndarray, labels: np.ndarray) -> _ClassMoments:
    means, scatters, counts = [], [], []
    for k in (0, 1):
        x = features[labels == k]
        if x.shape[0] < 2:
            raise CalibrationError(f"class {k} has {x.shape[0]} samples, need at least 2")
        mu = x.mean(axis=0)
        centered = x - mu
        means.append(mu)
        scatters.append(centered.T @ centered)
        counts.append(x.shape[0])
    return _ClassMoments(np.array(counts, dtype=float), np.array(means), np.array(scatters))


def _regularized_covariances(moments: _ClassMoments, lam: float, gamma: float) -> np.ndarray:
    """
    Shrink toward the pooled covariance, then regularize toward a scaled identity:

        S_k(lam)      = ((1-lam) N_k S_k + lam sum_k N_k S_k) / ((1-lam) N_k + lam N)
        S_k(lam, gam) = (1-gam) S_k(lam) + gam tr[S_k(lam)] / m I
    """
    m = moments.means.shape[1]
    pooled_scatter = moments.scatters.sum(axis=0)
    total = moments.counts.sum()
    out = np.empty_like(moments.scatters)
    for k in (0, 1):
        shrunk = ((1 - lam) * moments.scatters[k] + lam * pooled_scatter) / (
            (1 - lam) * moments.counts[k] + lam * total
        )
        cov = (1 - gamma) * shrunk + gamma * (np.trace(shrunk) / m) * np.eye(m)
        out[k] = (cov + cov.T) / 2.0
    return out


@dataclass(frozen=True, eq=False)
class RdaModel:
    """Class means and regularized covariances, index 0 = non-target, 1 = target."""

    means: np.ndarray
    covariances: np.ndarray
    lam: float
    gamma: float

    @property
    def dims(self) -> int:
        return self.means.shape[1]

    @cached_property
    def _factors(self) -> tuple:
        factors = []
        for k in (0, 1):
            try:
                factors.append(linalg.cho_factor(self.covariances[k], lower=True))
            except linalg.LinAlgError as e:
                raise SingularCovarianceError(
                    f"Covariance of class {k} is not positive definite "
                    f"(lambda={self.lam}, gamma={self.gamma})"
                ) from e
        return tuple(factors)

    def log_density(self, features: np.ndarray, k: int) -> np.ndarray:
        """Gaussian log-density of class k at each feature row."""
        factor, lower = self._factors[k]
        diff = features - self.means[k]
        solved = linalg.cho_solve((factor, lower), diff.T)
        mahalanobis = np.einsum("ij,ji->i", diff, solved)
        log_det = 2.0 * np.log(np.diag(factor)).sum()
        return -0.5 * (self.dims * math.log(2 * math.pi) + log_det + mahalanobis)


def rda_fit(features: np.ndarray, labels: np.ndarray, lam: float, gamma: float) -> RdaModel:
    """
    Fit maximum-likelihood class moments and regularize their covariances.

    Raises:
        ValueError: lam or gamma outside [0, 1]
        CalibrationError: a class with fewer than 2 samples
    """
    if not (0.0 <= lam <= 1.0 and 0.0 <= gamma <= 1.0):
        raise ValueError(f"lambda and gamma must lie in [0, 1], got ({lam}, {gamma})")
    data = CalibrationData(features, labels)
    moments = _class_moments(data.features, data.labels)
    return RdaModel(
        means=moments.means,
        covariances=_regularized_covariances(moments, lam, gamma),
        lam=lam,
        gamma=gamma,
    )


def rda_score(model: RdaModel, features: np.ndarray) -> np.ndarray | float:
    """
    Log ratio of the target to non-target Gaussian densities.

    Accepts one feature vector (returns a float) or a (N, m) matrix.

    Raises:
        SingularCovarianceError: a covariance cannot be factorized
    """
    x = np.asarray(features, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != model.dims:
        raise ValueError(f"feature dimension {x.shape[1]} does not match model ({model.dims})")
    scores = model.log_density(x, 1) - model.log_density(x, 0)
    return float(scores[0]) if single else scores


def auc(
    scores_target: Sequence[float] | np.ndarray,
    scores_nontarget: Sequence[float] | np.ndarray,
) -> float:
    """
    Mann-Whitney AUC from average ranks: the fraction of (target, non-target)
    pairs with the target scoring higher, ties counted 1/2.
    """
    pos = np.asarray(scores_target, dtype=float).ravel()
    neg = np.asarray(scores_nontarget, dtype=float).ravel()
    if pos.size == 0 or neg.size == 0:
        raise ValueError("both score sets must be nonempty")
    ranks = stats.rankdata(np.concatenate([pos, neg]))
    u = ranks[: pos.size].sum() - pos.size * (pos.size + 1) / 2.0
    return float(u / (pos.size * neg.size))


def _fold_assignment(n: int, folds: int, seed: int) -> np.ndarray:
    order = np.random.default_rng(seed).permutation(n)
    assignment = np.empty(n, dtype=int)
    assignment[order] = np.arange(n) % folds
    return assignment


@dataclass(frozen=True)
class CvSelection:
    """Selected regularization pair and its mean cross-validated AUC."""

    lam: float
    gamma: float
    mean_auc: float
    folds_used: int
    grid_auc: dict[tuple[float, float], float] = field(default_factory=dict, compare=False)


def cv_select(
    features: np.ndarray,
    labels: np.ndarray,
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    gamma_grid: Sequence[float] = DEFAULT_GAMMA_GRID,
    folds: int = DEFAULT_FOLDS,
    seed: int = 0,
) -> CvSelection:
    """
    Pick the (lambda, gamma) pair with the highest mean K-fold AUC.

    A fold whose held-out part lacks a class (or whose training part has
    fewer than 2 samples of a class) is skipped. A pair whose covariance
    cannot be factorized in some fold is excluded. Ties go to the smaller
    (gamma, lambda) pair.

    Raises:
        CalibrationError: every fold skipped, or every pair excluded
    """
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    if not lambda_grid or not gamma_grid:
        raise ValueError("lambda_grid and gamma_grid must be nonempty")
    data = CalibrationData(features, labels)
    x, y = data.features, data.labels
    assignment = _fold_assignment(y.size, folds, seed)
    pairs = sorted(
        {(float(g), float(lam)) for g, lam in itertools.product(gamma_grid, lambda_grid)}
    )

    per_pair: dict[tuple[float, float], list[float]] = {pair: [] for pair in pairs}
    excluded: set[tuple[float, float]] = set()
    folds_used = 0
    for f in range(folds):
        held_out = assignment == f
        y_test = y[held_out]
        y_train = y[~held_out]
        if y_test.min(initial=1) == 1 or y_test.max(initial=0) == 0:
            logger.warning(f"CV fold {f} skipped: held-out part lacks a class")
            continue
        if min(int(y_train.sum()), int(y_train.size - y_train.sum())) < 2:
            logger.warning(f"CV fold {f} skipped: training part has a class with < 2 samples")
            continue
        folds_used += 1
        moments = _class_moments(x[~held_out], y_train)
        x_test = x[held_out]
        for gamma, lam in pairs:
            if (gamma, lam) in excluded:
                continue
            model = RdaModel(
                means=moments.means,
                covariances=_regularized_covariances(moments, lam, gamma),
                lam=lam,
                gamma=gamma,
            )
            try:
                scores = rda_score(model, x_test)
            except SingularCovarianceError:
                excluded.add((gamma, lam))
                continue
            per_pair[(gamma, lam)].append(auc(scores[y_test == 1], scores[y_test == 0]))

    if folds_used == 0:
        raise CalibrationError("All cross-validation folds were skipped")
    grid_auc = {
        (lam, gamma): float(np.mean(per_pair[(gamma, lam)]))
        for gamma, lam in pairs
        if (gamma, lam) not in excluded
    }
    if not grid_auc:
        raise CalibrationError("No (lambda, gamma) pair produced a usable covariance")

    best: tuple[float, float] | None = None
    best_auc = -math.inf
    for gamma, lam in pairs:
        value = grid_auc.get((lam, gamma))
        if value is not None and value > best_auc:
            best, best_auc = (lam, gamma), value
    assert best is not None
    logger.info(
        f"Selected lambda={best[0]:g}, gamma={best[1]:g} "
        f"(mean AUC {best_auc:.4f} over {folds_used} folds)"
    )
    return CvSelection(
        lam=best[0], gamma=best[1], mean_auc=best_auc, folds_used=folds_used, grid_auc=grid_auc
    )


def out_of_fold_scores(
    features: np.ndarray,
    labels: np.ndarray,
    lam: float,
    gamma: float,
    folds: int = DEFAULT_FOLDS,
    seed: int = 0,
) -> np.ndarray:
    """Score every sample with an RDA model fitted on the other folds."""
    data = CalibrationData(features, labels)
    assignment = _fold_assignment(data.labels.size, folds, seed)
    scores = np.empty(data.labels.size)
    for f in range(folds):
        held_out = assignment == f
        if not held_out.any():
            continue
        model = rda_fit(data.features[~held_out], data.labels[~held_out], lam, gamma)
        scores[held_out] = rda_score(model, data.features[held_out])
    return scores


@dataclass(frozen=True)
class CalibrationReport:
    """Outcome of the calibration pipeline."""

    lam: float
    gamma: float
    cv_auc: float
    achieved_auc: float
    sigma: SigmaEstimates
    dims: int
    n_target: int
    n_nontarget: int

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "gamma": self.gamma,
            "cv_auc": self.cv_auc,
            "achieved_auc": self.achieved_auc,
            "sigma": self.sigma.to_dict(),
            "dims": self.dims,
            "n_target": self.n_target,
            "n_nontarget": self.n_nontarget,
        }


def calibrate_pipeline(
    data: CalibrationData,
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    gamma_grid: Sequence[float] = DEFAULT_GAMMA_GRID,
    folds: int = DEFAULT_FOLDS,
    seed: int = 0,
    quadrature_points: int = DEFAULT_QUADRATURE_POINTS,
) -> tuple[EvidenceModel, CalibrationReport]:
    """
    Features -> cross-validated RDA -> out-of-fold scores -> KDE per class.

    Returns:
        The KDE evidence model and a report with the selected pair, the
        AUC of the out-of-fold scores and the sigma point estimates
    """
    selection = cv_select(data.features, data.labels, lambda_grid, gamma_grid, folds, seed)
    scores = out_of_fold_scores(
        data.features, data.labels, selection.lam, selection.gamma, folds, seed
    )
    target_scores = scores[data.labels == 1]
    nontarget_scores = scores[data.labels == 0]
    model = EvidenceModel(
        target=kde_fit(target_scores),
        nontarget=kde_fit(nontarget_scores),
        quadrature_points=quadrature_points,
    )
    sigma = sigma_point_estimates(model)
    report = CalibrationReport(
        lam=selection.lam,
        gamma=selection.gamma,
        cv_auc=selection.mean_auc,
        achieved_auc=auc(target_scores, nontarget_scores),
        sigma=sigma,
        dims=data.dims,
        n_target=data.n_target,
        n_nontarget=data.n_nontarget,
    )
    logger.info(
        f"Calibrated KDE evidence model: AUC {report.achieved_auc:.4f}, "
        f"sigma+ {sigma.sigma_plus:.4g}, sigma- {sigma.sigma_minus:.4g}"
    )
    return model, report
