"""Gaussian-process Bayesian optimization with interchangeable inner optimizers.

A small, fully deterministic stack: Matérn 5/2 surrogate (scikit-learn
estimator API), expected-improvement and probability-of-improvement
acquisitions, projected L-BFGS and truncated-Newton maximizers wrapped
in a multi-start driver, a noisy 1-D benchmark, and a CLI that emits
plot-ready CSV/JSON artifacts.
"""

from .acquisition import (
    SIGMA_ZERO,
    AcquisitionConfig,
    AcquisitionKind,
    Incumbent,
    acquisition_gradient,
    acquisition_value,
    expected_improvement,
    incumbent_from,
    probability_of_improvement,
)
from .driver import (
    BoConfig,
    FirstIterationSnapshot,
    RunReport,
    TrialRecord,
    first_iteration_snapshot,
    run_bo,
    split_streams,
)
from .exceptions import (
    BoRunError,
    FactorizationError,
    GpFitError,
    NumericError,
    ProposalError,
)
from .gp import Dataset, KernelParams, MaternGP, kernel_matrix, matern52, scaled_sq_dist
from .objectives import NoisyObjective, grid_argmax, multimodal
from .optimizers import (
    Bounds,
    Method,
    OptimizerReport,
    OptimizerSettings,
    lbfgs_maximize,
    propose_next_sample,
    tnc_maximize,
)
from .stats import cholesky, solve_cholesky, std_normal_cdf, std_normal_pdf

__version__ = "0.1.0"

__all__ = [
    "AcquisitionConfig",
    "AcquisitionKind",
    "BoConfig",
    "BoRunError",
    "Bounds",
    "Dataset",
    "FactorizationError",
    "FirstIterationSnapshot",
    "GpFitError",
    "Incumbent",
    "KernelParams",
    "MaternGP",
    "Method",
    "NoisyObjective",
    "NumericError",
    "OptimizerReport",
    "OptimizerSettings",
    "ProposalError",
    "RunReport",
    "SIGMA_ZERO",
    "TrialRecord",
    "acquisition_gradient",
    "acquisition_value",
    "cholesky",
    "expected_improvement",
    "first_iteration_snapshot",
    "grid_argmax",
    "incumbent_from",
    "kernel_matrix",
    "lbfgs_maximize",
    "matern52",
    "multimodal",
    "probability_of_improvement",
    "propose_next_sample",
    "run_bo",
    "scaled_sq_dist",
    "solve_cholesky",
    "split_streams",
    "std_normal_cdf",
    "std_normal_pdf",
    "tnc_maximize",
]
