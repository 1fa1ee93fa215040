"""Stationary-subspace feature extraction for change-point detection.

The extension module carries the implementation; this package re-exports the
main operations: benchmark generation, projection fitting, model-order
selection, three change-point detectors, and ROC evaluation.
"""

from ssacpd._core import (
    ChangePointReport,
    DemixingModel,
    Epoching,
    EpochStats,
    NumericalError,
    OrderSelection,
    RocCurve,
    StationarityTest,
    ValidationError,
    WhiteningTransform,
    __version__,
    chi2_cdf,
    detect_cusum,
    detect_kohlmorgen_lemm,
    detect_slcd,
    epoch_stats,
    extract_sources,
    fit_ssa,
    generate,
    kl_gauss_symmetrized,
    make_epochs,
    roc_from_scores,
    select_order,
)

__all__ = [
    "ChangePointReport",
    "DemixingModel",
    "Epoching",
    "EpochStats",
    "NumericalError",
    "OrderSelection",
    "RocCurve",
    "StationarityTest",
    "ValidationError",
    "WhiteningTransform",
    "__version__",
    "chi2_cdf",
    "detect_cusum",
    "detect_kohlmorgen_lemm",
    "detect_slcd",
    "epoch_stats",
    "extract_sources",
    "fit_ssa",
    "generate",
    "kl_gauss_symmetrized",
    "make_epochs",
    "roc_from_scores",
    "select_order",
]
