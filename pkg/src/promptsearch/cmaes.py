"""Reference CMA-ES with default Hansen hyperparameters.

Used as the full-space reference solver in subspace-necessity studies.  The
covariance matrix costs O(n^2) memory and O(n^3) eigendecompositions, so the
ambient dimension is guarded; high-dimensional search should use the
projection-free ES variants instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .objectives import BlackBoxObjective
from .optimizers import BudgetSpec, InvalidSpecError

DIM_GUARD = 8192


class DimensionGuardError(ValueError):
    """Ambient dimension too large for an explicit covariance matrix."""


@dataclass
class CmaResult:
    best_x: np.ndarray
    best_loss: float
    evals: int
    # (eval_index, best_loss_so_far, sigma) per evaluation
    trajectory: list[tuple[int, float, float]] = field(default_factory=list)


def cmaes_run(
    objective: BlackBoxObjective,
    x0: np.ndarray,
    sigma0: float,
    budget: BudgetSpec,
    seed: int = 0,
    record_trajectory: bool = True,
) -> CmaResult:
    """Minimize ``objective`` starting from (x0, sigma0) under ``budget``.

    Implements the standard (mu/mu_w, lambda) CMA-ES: rank-one and rank-mu
    covariance updates, cumulation paths for sigma and C, default
    population size and learning rates.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    n = x0.shape[0]
    if n > DIM_GUARD:
        raise DimensionGuardError(
            f"CMA-ES guarded at n <= {DIM_GUARD} (got {n}); use the "
            "projection-free ES-ID optimizers for high-dimensional search"
        )
    if sigma0 <= 0:
        raise InvalidSpecError("sigma0 must be positive")
    rng = np.random.default_rng(seed)

    lam = 4 + int(3 * math.log(n))
    mu = lam // 2
    raw = math.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    weights = raw / raw.sum()
    mu_eff = 1.0 / np.sum(weights**2)

    cc = (4 + mu_eff / n) / (n + 4 + 2 * mu_eff / n)
    cs = (mu_eff + 2) / (n + mu_eff + 5)
    c1 = 2 / ((n + 1.3) ** 2 + mu_eff)
    cmu = min(1 - c1, 2 * (mu_eff - 2 + 1 / mu_eff) / ((n + 2) ** 2 + mu_eff))
    damps = 1 + 2 * max(0.0, math.sqrt((mu_eff - 1) / (n + 1)) - 1) + cs
    chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n**2))

    mean = x0.copy()
    sigma = float(sigma0)
    C = np.eye(n)
    pc = np.zeros(n)
    ps = np.zeros(n)
    B = np.eye(n)
    D = np.ones(n)
    eigen_stale = 0
    eigen_interval = max(1, int(1 / ((c1 + cmu) * n * 10)))

    best_x = mean.copy()
    best_loss = math.inf
    evals = 0
    trajectory: list[tuple[int, float, float]] = []

    while evals < budget.max_evals:
        if eigen_stale == 0:
            C = (C + C.T) / 2
            eigvals, B = np.linalg.eigh(C)
            D = np.sqrt(np.maximum(eigvals, 1e-40))
        eigen_stale = (eigen_stale + 1) % eigen_interval

        z = rng.standard_normal((lam, n))
        y = z * D[None, :] @ B.T
        xs = mean[None, :] + sigma * y
        losses = np.empty(lam)
        stop = False
        for i in range(lam):
            losses[i] = objective.evaluate(xs[i])
            evals += 1
            if losses[i] < best_loss:
                best_loss = losses[i]
                best_x = xs[i].copy()
            if record_trajectory:
                trajectory.append((evals, best_loss, sigma))
            if evals >= budget.max_evals or (
                budget.target_loss is not None and best_loss <= budget.target_loss
            ):
                stop = True
                break
        if stop and evals >= budget.max_evals:
            break
        if stop:
            break

        order = np.argsort(losses, kind="stable")[:mu]
        y_sel = y[order]
        y_w = weights @ y_sel
        mean = mean + sigma * y_w

        # C^{-1/2} y_w for the sigma path
        c_inv_half_yw = B @ ((B.T @ y_w) / D)
        ps = (1 - cs) * ps + math.sqrt(cs * (2 - cs) * mu_eff) * c_inv_half_yw
        h_sig = float(
            np.linalg.norm(ps)
            / math.sqrt(1 - (1 - cs) ** (2 * evals / lam))
            / chi_n
            < 1.4 + 2 / (n + 1)
        )
        pc = (1 - cc) * pc + h_sig * math.sqrt(cc * (2 - cc) * mu_eff) * y_w

        delta_h = (1 - h_sig) * cc * (2 - cc)
        C = (
            (1 - c1 - cmu) * C
            + c1 * (np.outer(pc, pc) + delta_h * C)
            + cmu * (y_sel.T * weights) @ y_sel
        )
        sigma *= math.exp((cs / damps) * (np.linalg.norm(ps) / chi_n - 1))

    return CmaResult(best_x=best_x, best_loss=float(best_loss), evals=evals, trajectory=trajectory)
