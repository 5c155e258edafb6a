"""Subspace-necessity diagnostics and confidence diagnostics.

gamma_op compares the displacement achieved by subspace search against
full-space search; gamma_pi measures the residual gap left after subspace
search, relative to the full-space displacement.  The confidence diagnostics
summarize how much global probability mass the predicted verbalizer carries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cmaes import cmaes_run
from .losses import LogitBundle
from .objectives import BlackBoxObjective, InvalidInputError
from .optimizers import BudgetSpec
from .projection import SubspaceProjection


class DegenerateStudyError(ValueError):
    """Full-space search made no progress; the gamma ratios are undefined."""


def gamma_op(x_star: np.ndarray, y_star: np.ndarray, projection: SubspaceProjection) -> float:
    """||A y_star|| / ||x_star - x_init||: relative optimization progress."""
    denom = float(np.linalg.norm(np.asarray(x_star) - projection.x_init))
    if denom == 0.0:
        raise DegenerateStudyError("x_star equals x_init; progress ratio undefined")
    return float(np.linalg.norm(projection.A @ np.asarray(y_star))) / denom


def gamma_pi(x_star: np.ndarray, y_star: np.ndarray, projection: SubspaceProjection) -> float:
    """||x_star - lift(y_star)|| / ||x_star - x_init||: relative post-hoc gap."""
    x_star = np.asarray(x_star, dtype=np.float64)
    denom = float(np.linalg.norm(x_star - projection.x_init))
    if denom == 0.0:
        raise DegenerateStudyError("x_star equals x_init; progress ratio undefined")
    return float(np.linalg.norm(x_star - projection.lift(np.asarray(y_star)))) / denom


@dataclass
class SubspaceStudyResult:
    f_ps: float  # full-space solution loss
    f_bbt: float  # subspace solution loss
    gamma_op: float
    gamma_pi: float
    x_star: np.ndarray
    y_star: np.ndarray
    full_evals: int
    sub_evals: int
    seed: int


def run_subspace_study(
    objective: BlackBoxObjective,
    projection: SubspaceProjection,
    full_budget: BudgetSpec,
    sub_budget: BudgetSpec,
    sigma0_full: float = 1.0,
    sigma0_sub: float = 1.0,
    seed: int = 0,
) -> SubspaceStudyResult:
    """Solve the same objective twice: full-space CMA-ES started at x_init,
    and subspace CMA-ES started at the all-zero vector, sharing the anchor."""
    if full_budget.max_evals <= 0 or sub_budget.max_evals <= 0:
        raise DegenerateStudyError("budgets must be positive")
    sub_objective = projection.wrap_objective(objective)
    full = cmaes_run(
        objective, projection.x_init, sigma0_full, full_budget, seed=seed,
        record_trajectory=False,
    )
    sub = cmaes_run(
        sub_objective, np.zeros(projection.d_tilde), sigma0_sub, sub_budget,
        seed=seed + 1, record_trajectory=False,
    )
    return SubspaceStudyResult(
        f_ps=full.best_loss,
        f_bbt=sub.best_loss,
        gamma_op=gamma_op(full.best_x, sub.best_x, projection),
        gamma_pi=gamma_pi(full.best_x, sub.best_x, projection),
        x_star=full.best_x,
        y_star=sub.best_x,
        full_evals=full.evals,
        sub_evals=sub.evals,
        seed=seed,
    )


@dataclass
class ConfidenceDiagnostics:
    prediction_probability: float  # mean softmax-over-V probability of z_hat
    global_rank: float  # mean competition rank of z_hat's logit within V
    n_examples: int


def confidence_diagnostics(bundles: list[LogitBundle]) -> ConfidenceDiagnostics:
    """Per-example predicted verbalizer z_hat = argmax over the verbalizer
    set; P averages its full-vocabulary softmax probability, R averages its
    competition rank (1 + number of strictly greater logits)."""
    if not bundles:
        raise InvalidInputError("need at least one logit bundle")
    probs = []
    ranks = []
    for bundle in bundles:
        ids = np.array(bundle.verbalizer_ids)
        z_hat = int(ids[np.argmax(bundle.logits[ids])])
        shifted = bundle.logits - np.max(bundle.logits)
        p = float(np.exp(shifted[z_hat]) / np.sum(np.exp(shifted)))
        rank = 1 + int(np.sum(bundle.logits > bundle.logits[z_hat]))
        probs.append(p)
        ranks.append(rank)
    return ConfidenceDiagnostics(
        prediction_probability=float(np.mean(probs)),
        global_rank=float(np.mean(ranks)),
        n_examples=len(bundles),
    )
