"""Search algorithms: (1+1)-ES, self-adaptive ES, and zeroth-order SGD.

Both evolution strategies use isotropic Gaussian mutation with a single
global step size whose adaptation speed is governed by a damping factor tau.
Standard practice sets tau from the ambient dimension, tau = sqrt(2 d); the
ID-aware variant sets it from the configured intrinsic dimension instead,
tau = sqrt(2 d_tilde), which is the whole point of searching the full space
without a projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .objectives import BlackBoxObjective, InvalidInputError

SIGMA_MIN = 1e-300
SIGMA_MAX = 1e300


class StepSizeBlowupError(RuntimeError):
    """Step size left [1e-300, 1e300]; the run is aborted as diverged."""


class InvalidSpecError(ValueError):
    """Raised for invalid optimizer hyperparameters."""


@dataclass(frozen=True)
class DampingMode:
    """Damping factor selection: ambient-dimension or intrinsic-dimension."""

    variant: str  # "standard" | "id_aware"
    d: int
    d_tilde: int | None = None

    def __post_init__(self):
        if self.variant not in ("standard", "id_aware"):
            raise InvalidSpecError(f"unknown damping variant {self.variant!r}")
        if self.d <= 0:
            raise InvalidSpecError("d must be positive")
        if self.variant == "id_aware" and (self.d_tilde is None or self.d_tilde <= 0):
            raise InvalidSpecError("id_aware damping requires a positive d_tilde")

    @property
    def tau(self) -> float:
        if self.variant == "standard":
            return math.sqrt(2.0 * self.d)
        return math.sqrt(2.0 * self.d_tilde)


@dataclass(frozen=True)
class BudgetSpec:
    """Run terminates at whichever of the two bounds is hit first."""

    max_evals: int = 5000
    target_loss: float | None = None

    def __post_init__(self):
        if self.max_evals <= 0:
            raise InvalidSpecError("max_evals must be positive")


def _check_sigma(sigma: float) -> float:
    if not (SIGMA_MIN < sigma < SIGMA_MAX):
        raise StepSizeBlowupError(f"step size {sigma} left the sane range")
    return sigma


@dataclass
class StepReport:
    """Losses of this step's trial evaluations, in evaluation order, plus the
    step size that was in effect while they were made."""

    trial_losses: list[float]
    sigma_used: float


class OnePlusOneES:
    """Elitist single-individual ES with the 1/5 success rule.

    Each step samples u ~ N(0, I_d), accepts x + sigma u iff it does not
    increase the loss (ties count as success), and updates
    sigma <- sigma * exp((s - 1/5) / tau).  Exactly one evaluation per step.
    """

    def __init__(self, x0: np.ndarray, f0: float, sigma0: float, tau: float, seed: int = 0):
        if sigma0 <= 0:
            raise InvalidSpecError("sigma0 must be positive")
        if tau <= 0:
            raise InvalidSpecError("tau must be positive")
        self.x = np.asarray(x0, dtype=np.float64).copy()
        self.fx = float(f0)
        self.sigma = float(sigma0)
        self.tau = float(tau)
        self.rng = np.random.default_rng(seed)

    def step(self, objective: BlackBoxObjective) -> StepReport:
        sigma_used = self.sigma
        u = self.rng.standard_normal(self.x.shape[0])
        trial = self.x + self.sigma * u
        f_trial = objective.evaluate(trial)
        success = f_trial <= self.fx
        if success:
            self.x = trial
            self.fx = f_trial
        self.sigma = _check_sigma(
            self.sigma * math.exp((float(success) - 0.2) / self.tau)
        )
        return StepReport([f_trial], sigma_used)

    @property
    def best(self) -> tuple[np.ndarray, float]:
        return self.x, self.fx


class SaES:
    """(mu/mu, lambda) ES with per-trial step-size self-adaptation.

    Each trial draws delta ~ N(0,1), mutates its own step size
    sigma_i = sigma * exp(delta / tau), and perturbs the mean with
    sigma_i * N(0, I_d).  The mean and the global sigma are the plain
    averages of the mu best trials (stable sort by loss, then trial index).
    Consumes lambda evaluations per step.
    """

    def __init__(
        self,
        x0: np.ndarray,
        sigma0: float,
        tau: float,
        lam: int = 20,
        mu: int = 5,
        seed: int = 0,
    ):
        if sigma0 <= 0:
            raise InvalidSpecError("sigma0 must be positive")
        if tau <= 0:
            raise InvalidSpecError("tau must be positive")
        if lam < 2:
            raise InvalidSpecError("lambda must be >= 2")
        if not (1 <= mu <= lam):
            raise InvalidSpecError("need 1 <= mu <= lambda")
        self.x = np.asarray(x0, dtype=np.float64).copy()
        self.sigma = float(sigma0)
        self.tau = float(tau)
        self.lam = int(lam)
        self.mu = int(mu)
        self.rng = np.random.default_rng(seed)
        self.best_x = self.x.copy()
        self.best_f = math.inf

    def step(self, objective: BlackBoxObjective) -> StepReport:
        sigma_used = self.sigma
        d = self.x.shape[0]
        deltas = self.rng.standard_normal(self.lam)
        sigmas = self.sigma * np.exp(deltas / self.tau)
        trials = self.x[None, :] + sigmas[:, None] * self.rng.standard_normal((self.lam, d))
        losses = [objective.evaluate(t) for t in trials]
        order = sorted(range(self.lam), key=lambda i: (losses[i], i))
        elite = order[: self.mu]
        self.x = trials[elite].mean(axis=0)
        self.sigma = _check_sigma(float(sigmas[elite].mean()))
        if losses[order[0]] < self.best_f:
            self.best_f = losses[order[0]]
            self.best_x = trials[order[0]].copy()
        return StepReport(list(losses), sigma_used)

    @property
    def best(self) -> tuple[np.ndarray, float]:
        return self.best_x, self.best_f


class ZOSGD:
    """Gradient descent on a Gaussian-smoothed finite-difference estimate.

    g_hat = (1/q) sum_j [(f(x + mu_r u_j) - f(x)) / mu_r] u_j with
    u_j ~ N(0, I_d); consumes q + 1 evaluations per step.
    """

    def __init__(self, x0: np.ndarray, lr: float, smoothing: float, q: int, seed: int = 0):
        if lr <= 0:
            raise InvalidSpecError("lr must be positive")
        if smoothing <= 0:
            raise InvalidSpecError("smoothing must be positive")
        if q < 1:
            raise InvalidSpecError("q must be >= 1")
        self.x = np.asarray(x0, dtype=np.float64).copy()
        self.lr = float(lr)
        self.smoothing = float(smoothing)
        self.q = int(q)
        self.rng = np.random.default_rng(seed)
        self.best_x = self.x.copy()
        self.best_f = math.inf

    def estimate_gradient(self, objective: BlackBoxObjective) -> tuple[np.ndarray, list[float]]:
        d = self.x.shape[0]
        fx = objective.evaluate(self.x)
        losses = [fx]
        g = np.zeros(d)
        for _ in range(self.q):
            u = self.rng.standard_normal(d)
            f_pert = objective.evaluate(self.x + self.smoothing * u)
            losses.append(f_pert)
            g += (f_pert - fx) / self.smoothing * u
        return g / self.q, losses

    def step(self, objective: BlackBoxObjective) -> StepReport:
        g, losses = self.estimate_gradient(objective)
        if losses[0] < self.best_f:
            self.best_f = losses[0]
            self.best_x = self.x.copy()
        self.x = self.x - self.lr * g
        return StepReport(losses, self.smoothing)

    @property
    def best(self) -> tuple[np.ndarray, float]:
        return self.best_x, self.best_f
