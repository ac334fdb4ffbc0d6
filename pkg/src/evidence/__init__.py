"""Evidence models: calibration, class-conditional densities and sigma estimates."""

from .calibration import (
    CalibrationData,
    CalibrationReport,
    CvSelection,
    RdaModel,
    auc,
    calibrate_pipeline,
    cv_select,
    out_of_fold_scores,
    rda_fit,
    rda_score,
    synth_calibration,
)
from .density import (
    Density,
    EvidenceModel,
    GaussianDensity,
    KernelDensity,
    SigmaEstimates,
    evidence_auc,
    gaussian_evidence_model,
    kde_fit,
    load_evidence_model,
    sample_evidence,
    save_evidence_model,
    separation_for_auc,
    sigma_point_estimates,
    silverman_bandwidth,
)

__all__ = [
    "CalibrationData",
    "CalibrationReport",
    "CvSelection",
    "Density",
    "EvidenceModel",
    "GaussianDensity",
    "KernelDensity",
    "RdaModel",
    "SigmaEstimates",
    "auc",
    "calibrate_pipeline",
    "cv_select",
    "evidence_auc",
    "gaussian_evidence_model",
    "kde_fit",
    "load_evidence_model",
    "out_of_fold_scores",
    "rda_fit",
    "rda_score",
    "sample_evidence",
    "save_evidence_model",
    "separation_for_auc",
    "sigma_point_estimates",
    "silverman_bandwidth",
    "synth_calibration",
]
