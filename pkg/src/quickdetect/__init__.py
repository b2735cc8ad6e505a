"""Sequential and offline change-point detection for univariate series.

The package covers the full pipeline for monitoring a stream of
observations for a distribution change:

* :mod:`quickdetect.series` — loading price CSVs, difference series,
  moment estimation and distributional diagnostics;
* :mod:`quickdetect.models` — Gaussian change models, exact
  log-likelihood ratios, linear-quadratic and rank scores;
* :mod:`quickdetect.detect` — CUSUM and Shiryaev-Roberts recursions,
  single-run and multi-cyclic;
* :mod:`quickdetect.offline` — retrospective change-point estimation and
  recursive segmentation;
* :mod:`quickdetect.renewal` — renewal-theoretic constants and
  closed-form approximations to operating characteristics;
* :mod:`quickdetect.calib` — Monte Carlo estimation of operating
  characteristics and threshold calibration;
* :mod:`quickdetect.cli` — the ``quickdetect`` command-line pipeline.
"""

from .calib import (
    CalibrationError,
    CalibrationSpec,
    DetectorConfig,
    PerformanceEstimate,
    estimate_arl,
    estimate_sadd,
    estimate_stadd,
    solve_threshold,
)
from .detect import (
    AlarmRecord,
    DetectionTrace,
    DetectorState,
    cusum_step,
    fresh_state,
    multi_cyclic_run,
    run_detector,
    sr_step,
    to_ratios,
)
from .models import (
    GaussianChangeModel,
    RankState,
    ScoreParams,
    design_coefficients,
    linear_quadratic_score,
    llr,
    rank_score,
)
from .offline import (
    BDTrace,
    SegmentationResult,
    bd_estimate,
    bd_segment,
    bd_statistic,
    null_threshold,
)
from .renewal import (
    Estimate,
    EstimationPolicy,
    RenewalConstants,
    arl_approx,
    delay_approx,
    estimate_constants,
    kl_numbers,
)
from .series import (
    AcfResult,
    CsvFormatError,
    CsvSchema,
    DiagnosticBundle,
    MomentEstimate,
    PriceSeries,
    ReturnSeries,
    acf,
    diagnostics,
    estimate_moments,
    load_csv,
    standardize,
    to_returns,
)

__version__ = "0.1.0"

__all__ = [
    "AcfResult",
    "AlarmRecord",
    "BDTrace",
    "CalibrationError",
    "CalibrationSpec",
    "CsvFormatError",
    "CsvSchema",
    "DetectionTrace",
    "DetectorConfig",
    "DetectorState",
    "DiagnosticBundle",
    "Estimate",
    "EstimationPolicy",
    "GaussianChangeModel",
    "MomentEstimate",
    "PerformanceEstimate",
    "PriceSeries",
    "RankState",
    "RenewalConstants",
    "ReturnSeries",
    "ScoreParams",
    "SegmentationResult",
    "acf",
    "arl_approx",
    "bd_estimate",
    "bd_segment",
    "bd_statistic",
    "cusum_step",
    "delay_approx",
    "design_coefficients",
    "diagnostics",
    "estimate_arl",
    "estimate_constants",
    "estimate_moments",
    "estimate_sadd",
    "estimate_stadd",
    "fresh_state",
    "kl_numbers",
    "linear_quadratic_score",
    "llr",
    "load_csv",
    "multi_cyclic_run",
    "null_threshold",
    "rank_score",
    "run_detector",
    "solve_threshold",
    "sr_step",
    "standardize",
    "to_ratios",
    "__version__",
]
