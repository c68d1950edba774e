"""Pleiotropy-robust Mendelian randomization from GWAS summary data."""

__version__ = "0.1.0"

from .data import (
    SummaryDataset,
    WeightVector,
    load_summary_csv,
    save_summary_csv,
    subset_covariates,
    subset_variants,
    weights,
)
from .estimators import (
    Z95,
    BalanceDiagnostic,
    BalancingWeights,
    CausalEstimate,
    balance_diagnostic,
    balancing_estimate,
    balancing_weights,
    fit_weighted_regression,
    ivw,
    mv_ivw,
)
from .exceptions import ConvergenceError, NumericalError, PleiomrError, ValidationError
from .inference import (
    InferenceResult,
    double_estimation_ci,
    oracle_ci,
    three_sample_ci,
    two_sample_ci,
)
from .regularize import (
    CvConfig,
    RegularizationFit,
    cross_validate,
    fit_to_csv,
    lambda_path,
    penalized_objective,
    post_regularization,
    projection_complement,
    regularized_estimate,
    solve_penalized,
)
from .simulate import (
    ALL_METHODS,
    Replicate,
    ScenarioConfig,
    SimulationReport,
    generate_replicate,
    preset_scenario,
    run_study,
    scenario_from_file,
)

__all__ = [name for name in dir() if not name.startswith("_")]
