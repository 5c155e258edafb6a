"""Single-run orchestration: drive an optimizer against an objective under a
budget while recording a per-evaluation trajectory."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cmaes import cmaes_run
from .objectives import BlackBoxObjective
from .optimizers import (
    BudgetSpec,
    DampingMode,
    InvalidSpecError,
    OnePlusOneES,
    SaES,
    ZOSGD,
)

ALGORITHMS = ("one_plus_one", "saes", "zosgd", "cmaes")


@dataclass(frozen=True)
class OptimizerConfig:
    algorithm: str
    damping: str = "standard"  # standard | id_aware, ES variants only
    d_tilde: int | None = None
    sigma0: float = 1.0
    lam: int = 20
    mu: int = 5
    lr: float = 0.01
    smoothing: float = 1e-4
    q: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidSpecError(
                f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}"
            )

    def damping_mode(self, d: int) -> DampingMode:
        return DampingMode(self.damping, d=d, d_tilde=self.d_tilde)


@dataclass(frozen=True)
class TrajectoryRecord:
    eval_index: int
    best_loss: float
    sigma: float
    wall_ms: int


@dataclass
class RunResult:
    best_x: np.ndarray
    best_loss: float
    evals: int
    trajectory: list[TrajectoryRecord] = field(default_factory=list)


def _cadence(budget: BudgetSpec) -> int:
    # Bounded log size for very long runs.
    return 1 if budget.max_evals <= 10_000 else 10


def run_optimizer(
    config: OptimizerConfig,
    objective: BlackBoxObjective,
    budget: BudgetSpec,
    x0: np.ndarray | None = None,
) -> RunResult:
    """Run the configured algorithm to the budget; reproducible bit-exactly
    from (config, objective spec)."""
    d = objective.ambient_dim
    if x0 is None:
        x0 = np.zeros(d)
    else:
        x0 = np.asarray(x0, dtype=np.float64)
    start = time.monotonic()
    cadence = _cadence(budget)
    trajectory: list[TrajectoryRecord] = []

    def record(eval_index: int, best_loss: float, sigma: float):
        if eval_index % cadence == 0 or eval_index == budget.max_evals:
            wall_ms = int((time.monotonic() - start) * 1000)
            trajectory.append(TrajectoryRecord(eval_index, best_loss, sigma, wall_ms))

    if config.algorithm == "cmaes":
        result = cmaes_run(objective, x0, config.sigma0, budget, seed=config.seed)
        for eval_index, best, sigma in result.trajectory:
            record(eval_index, best, sigma)
        return RunResult(result.best_x, result.best_loss, result.evals, trajectory)

    best_x = x0.copy()
    best_loss = math.inf
    evals = 0

    def note(loss: float, x_getter, sigma: float):
        nonlocal best_loss, best_x, evals
        evals += 1
        if loss < best_loss:
            best_loss = loss
            best_x = x_getter()
        record(evals, best_loss, sigma)

    if config.algorithm == "one_plus_one":
        tau = config.damping_mode(d).tau
        f0 = objective.evaluate(x0)
        opt = OnePlusOneES(x0, f0, config.sigma0, tau, seed=config.seed)
        note(f0, lambda: x0.copy(), config.sigma0)
        while evals < budget.max_evals and not _hit_target(best_loss, budget):
            report = opt.step(objective)
            note(report.trial_losses[0], lambda: opt.x.copy(), report.sigma_used)
        return RunResult(opt.x, opt.fx, evals, trajectory)

    if config.algorithm == "saes":
        tau = config.damping_mode(d).tau
        opt = SaES(x0, config.sigma0, tau, lam=config.lam, mu=config.mu, seed=config.seed)
        while evals + opt.lam <= budget.max_evals and not _hit_target(best_loss, budget):
            report = opt.step(objective)
            bx, bf = opt.best
            for loss in report.trial_losses:
                note(loss, lambda: bx.copy(), report.sigma_used)
        return RunResult(best_x, best_loss, evals, trajectory)

    # zosgd: only the center evaluation corresponds to a retrievable point,
    # so the perturbation probes advance the counter without moving the best.
    opt = ZOSGD(x0, config.lr, config.smoothing, config.q, seed=config.seed)
    while evals + config.q + 1 <= budget.max_evals and not _hit_target(best_loss, budget):
        x_center = opt.x.copy()
        report = opt.step(objective)
        for j, loss in enumerate(report.trial_losses):
            if j == 0:
                note(loss, lambda: x_center, report.sigma_used)
            else:
                evals += 1
                record(evals, best_loss, report.sigma_used)
    return RunResult(best_x, best_loss, evals, trajectory)


def _hit_target(best_loss: float, budget: BudgetSpec) -> bool:
    return budget.target_loss is not None and best_loss <= budget.target_loss
