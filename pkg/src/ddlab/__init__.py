"""Random-feature least-squares laboratory for double descent and effective
model complexity."""

__version__ = "0.1.0"

from .data import (
    Dataset,
    LabelNoiseSpec,
    apply_label_noise,
    load_fashion_mnist,
    load_idx,
    make_synthetic,
    make_teacher,
    parse_idx,
    subsample,
)
from .emc import EMCEstimate, TrainingProcedure, classify_regime, estimate_emc, expected_train_error
from .estimators import LeastSquaresRegressor, RandomFeatureClassifier
from .exceptions import (
    ContractError,
    DivergentStepWarning,
    FormatError,
    InputError,
    SchemaVersionError,
)
from .features import FeatureMap, RandomFourierFeatures, apply_feature_map, sample_feature_map
from .solver import (
    Metrics,
    SolverSpec,
    evaluate,
    fit_coefficients,
    gd_closed_form,
    gd_iterative,
    min_norm_solve,
    ridge_solve,
)
from .sweep import (
    SweepResult,
    SweepSpec,
    TaskSpec,
    ensemble_run,
    locate_peak,
    run_epoch_wise,
    run_grid,
    run_model_wise,
    run_ridge_sweep,
    run_sample_wise,
)

__all__ = [
    "ContractError", "Dataset", "DivergentStepWarning", "EMCEstimate", "FeatureMap", "FormatError",
    "InputError", "LabelNoiseSpec", "LeastSquaresRegressor", "Metrics", "RandomFeatureClassifier",
    "RandomFourierFeatures", "SchemaVersionError", "SolverSpec", "SweepResult", "SweepSpec", "TaskSpec",
    "TrainingProcedure", "apply_feature_map", "apply_label_noise", "classify_regime", "ensemble_run",
    "estimate_emc", "evaluate", "expected_train_error", "fit_coefficients", "gd_closed_form",
    "gd_iterative", "load_fashion_mnist", "load_idx", "locate_peak", "make_synthetic", "make_teacher",
    "min_norm_solve", "parse_idx", "ridge_solve", "run_epoch_wise", "run_grid", "run_model_wise",
    "run_ridge_sweep", "run_sample_wise", "sample_feature_map", "subsample",
]
