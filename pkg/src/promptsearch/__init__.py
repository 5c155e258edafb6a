"""Projection-free high-dimensional black-box optimization toolkit."""

from .losses import LogitBundle, confidence_regularized_loss, cross_entropy_loss
from .objectives import (
    BlackBoxObjective,
    LogitLandscapeObjective,
    LogitLandscapeSpec,
    QuadraticObjective,
    SyntheticObjective,
    SyntheticObjectiveSpec,
)
from .optimizers import BudgetSpec, DampingMode, OnePlusOneES, SaES, ZOSGD
from .cmaes import cmaes_run
from .projection import SubspaceProjection, aligned_initial_step, monte_carlo_alignment
from .intrinsic_dim import (
    collect_gradients,
    estimate_id,
    id_sweep,
    mle_intrinsic_dimension,
    normalize_gradients,
)
from .analysis import (
    ConfidenceDiagnostics,
    confidence_diagnostics,
    gamma_op,
    gamma_pi,
    run_subspace_study,
)
from .runner import OptimizerConfig, RunResult, TrajectoryRecord, run_optimizer

__all__ = [
    "BlackBoxObjective",
    "BudgetSpec",
    "ConfidenceDiagnostics",
    "DampingMode",
    "LogitBundle",
    "LogitLandscapeObjective",
    "LogitLandscapeSpec",
    "OnePlusOneES",
    "OptimizerConfig",
    "QuadraticObjective",
    "RunResult",
    "SaES",
    "SubspaceProjection",
    "SyntheticObjective",
    "SyntheticObjectiveSpec",
    "TrajectoryRecord",
    "ZOSGD",
    "aligned_initial_step",
    "cmaes_run",
    "collect_gradients",
    "confidence_diagnostics",
    "confidence_regularized_loss",
    "cross_entropy_loss",
    "estimate_id",
    "gamma_op",
    "gamma_pi",
    "id_sweep",
    "mle_intrinsic_dimension",
    "monte_carlo_alignment",
    "normalize_gradients",
    "run_optimizer",
    "run_subspace_study",
]
