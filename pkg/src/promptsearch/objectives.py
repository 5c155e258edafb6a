"""Black-box objective contract and synthetic benchmark objectives.

Objectives map a flattened prompt vector in R^d to a scalar loss (the mean
over a fixed example set).  Synthetic objectives embed a classical test
function in a known low-dimensional subspace so the gradient manifold has a
controlled intrinsic dimension; the logit-landscape objective is a low-rank
stand-in for a language model's vocabulary logits, enabling loss
regularization experiments without a real model.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .losses import LogitBundle, confidence_regularized_loss, cross_entropy_loss


class InvalidInputError(ValueError):
    """Raised on dimension mismatches or non-finite inputs."""


class UnsupportedModeError(RuntimeError):
    """Raised when a gradient mode is not available for an objective."""


class EvalCounter:
    """Thread-safe evaluation counter, shared across objective wrappers."""

    def __init__(self):
        self._lock = threading.Lock()
        self._count = 0

    def increment(self) -> int:
        with self._lock:
            self._count += 1
            return self._count

    @property
    def count(self) -> int:
        return self._count


class BlackBoxObjective:
    """Evaluation contract: a pure map from R^d to a scalar loss.

    Subclasses implement ``_loss``; ``evaluate`` adds input validation and
    eval accounting.  Objectives are immutable after construction apart from
    the counter.
    """

    def __init__(self, ambient_dim: int, counter: EvalCounter | None = None):
        if ambient_dim <= 0:
            raise InvalidInputError(f"ambient_dim must be positive, got {ambient_dim}")
        self.ambient_dim = int(ambient_dim)
        self.counter = counter if counter is not None else EvalCounter()

    @property
    def n_evals(self) -> int:
        return self.counter.count

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.ambient_dim,):
            raise InvalidInputError(
                f"expected vector of length {self.ambient_dim}, got shape {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("input vector contains NaN or Inf")
        return x

    def _loss(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def evaluate(self, x) -> float:
        """Mean loss over the objective's fixed example set; counts one eval."""
        x = self._check(x)
        value = float(self._loss(x))
        self.counter.increment()
        return value

    def gradient(self, x, mode: str = "analytic", h: float | None = None) -> np.ndarray:
        """Gradient of the loss at x.

        ``analytic`` is available only where a closed form exists;
        ``central_difference`` works for any objective at 2d evaluations'
        worth of queries (not counted against the eval counter: gradients are
        analysis-only).
        """
        x = self._check(x)
        if mode == "analytic":
            return self._analytic_gradient(x)
        if mode == "central_difference":
            if h is None:
                h = 1e-4 * (1.0 + float(np.max(np.abs(x))))
            if h <= 0:
                raise InvalidInputError(f"finite-difference step must be positive, got {h}")
            g = np.empty(self.ambient_dim)
            for i in range(self.ambient_dim):
                e = np.zeros(self.ambient_dim)
                e[i] = h
                g[i] = (self._loss(x + e) - self._loss(x - e)) / (2.0 * h)
            return g
        raise InvalidInputError(f"unknown gradient mode {mode!r}")

    def _analytic_gradient(self, x: np.ndarray) -> np.ndarray:
        raise UnsupportedModeError(
            f"{type(self).__name__} does not support analytic gradients"
        )


def _orthonormal_rows(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Row-orthonormal matrix from a seeded standard-normal draw (via QR)."""
    m = rng.standard_normal((cols, rows))
    q, r = np.linalg.qr(m)
    # Fix signs so the factorization is unique and deterministic.
    q = q * np.sign(np.diag(r))
    return q.T


_INNER_FUNCTIONS = ("sphere", "rosenbrock", "rastrigin")


@dataclass(frozen=True)
class SyntheticObjectiveSpec:
    """Config for an embedded test function with known intrinsic dimension.

    The embedding matrix and shift are regenerated from ``seed``; they are
    never stored on disk.
    """

    ambient_dim: int
    true_id: int
    inner_function: str = "sphere"
    seed: int = 0
    shift_scale: float = 0.0  # 0 keeps the optimum shift at the origin

    def __post_init__(self):
        if self.ambient_dim <= 0:
            raise InvalidInputError("ambient_dim must be positive")
        if not (0 < self.true_id <= self.ambient_dim):
            raise InvalidInputError("true_id must be in (0, ambient_dim]")
        if self.inner_function not in _INNER_FUNCTIONS:
            raise InvalidInputError(
                f"inner_function must be one of {_INNER_FUNCTIONS}, got {self.inner_function!r}"
            )


def _sphere(u):
    return float(np.dot(u, u))


def _sphere_grad(u):
    return 2.0 * u


def _rosenbrock(u):
    return float(np.sum(100.0 * (u[1:] - u[:-1] ** 2) ** 2 + (1.0 - u[:-1]) ** 2))


def _rosenbrock_grad(u):
    g = np.zeros_like(u)
    diff = u[1:] - u[:-1] ** 2
    g[:-1] += -400.0 * u[:-1] * diff - 2.0 * (1.0 - u[:-1])
    g[1:] += 200.0 * diff
    return g


def _rastrigin(u):
    return float(10.0 * u.size + np.sum(u**2 - 10.0 * np.cos(2.0 * np.pi * u)))


def _rastrigin_grad(u):
    return 2.0 * u + 20.0 * np.pi * np.sin(2.0 * np.pi * u)


_INNER = {
    "sphere": (_sphere, _sphere_grad),
    "rosenbrock": (_rosenbrock, _rosenbrock_grad),
    "rastrigin": (_rastrigin, _rastrigin_grad),
}


class SyntheticObjective(BlackBoxObjective):
    """f(x) = g(B (x - x0)) with B row-orthonormal of shape (true_id, d).

    The gradient B^T g'(B (x - x0)) always lies in the row space of B, so the
    gradient manifold has dimension exactly ``true_id``.
    """

    def __init__(
        self,
        spec: SyntheticObjectiveSpec,
        embedding: np.ndarray | None = None,
        shift: np.ndarray | None = None,
    ):
        super().__init__(spec.ambient_dim)
        self.spec = spec
        rng = np.random.default_rng(spec.seed)
        if embedding is None:
            embedding = _orthonormal_rows(spec.true_id, spec.ambient_dim, rng)
        else:
            embedding = np.asarray(embedding, dtype=np.float64)
            if embedding.shape != (spec.true_id, spec.ambient_dim):
                raise InvalidInputError("embedding shape mismatch")
            gram = embedding @ embedding.T
            if not np.allclose(gram, np.eye(spec.true_id), atol=1e-10):
                raise InvalidInputError("embedding rows must be orthonormal")
        if shift is None:
            if spec.shift_scale > 0:
                shift = spec.shift_scale * rng.standard_normal(spec.ambient_dim)
            else:
                shift = np.zeros(spec.ambient_dim)
        else:
            shift = np.asarray(shift, dtype=np.float64)
            if shift.shape != (spec.ambient_dim,):
                raise InvalidInputError("shift shape mismatch")
        self.embedding = embedding
        self.shift = shift
        self._g, self._g_grad = _INNER[spec.inner_function]

    def _loss(self, x: np.ndarray) -> float:
        return self._g(self.embedding @ (x - self.shift))

    def _analytic_gradient(self, x: np.ndarray) -> np.ndarray:
        u = self.embedding @ (x - self.shift)
        return self.embedding.T @ self._g_grad(u)


class QuadraticObjective(BlackBoxObjective):
    """f(x) = ||x - x_opt||^2: the closed-form workhorse for subspace studies."""

    def __init__(self, x_opt: np.ndarray):
        x_opt = np.asarray(x_opt, dtype=np.float64)
        super().__init__(x_opt.shape[0])
        self.x_opt = x_opt

    def _loss(self, x: np.ndarray) -> float:
        d = x - self.x_opt
        return float(np.dot(d, d))

    def _analytic_gradient(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * (x - self.x_opt)


class WeightedQuadraticObjective(BlackBoxObjective):
    """f(x) = sum_i h_i (x - x_opt)_i^2 with positive diagonal weights.

    Anisotropy gives the subspace-study family controllable off-subspace
    energy: fitting the heavily weighted coordinates through a random
    subspace forces large excursions in the light ones, so the lifted
    subspace optimum can land Euclidean-farther from x_opt than the anchor.
    """

    def __init__(self, x_opt: np.ndarray, weights: np.ndarray):
        x_opt = np.asarray(x_opt, dtype=np.float64)
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != x_opt.shape:
            raise InvalidInputError("weights and x_opt must have the same shape")
        if np.any(weights <= 0):
            raise InvalidInputError("weights must be positive")
        super().__init__(x_opt.shape[0])
        self.x_opt = x_opt
        self.weights = weights

    def _loss(self, x: np.ndarray) -> float:
        diff = x - self.x_opt
        return float(np.sum(self.weights * diff * diff))

    def _analytic_gradient(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * self.weights * (x - self.x_opt)


class LinearObjective(BlackBoxObjective):
    """f(x) = c . x, used to test gradient-estimator unbiasedness."""

    def __init__(self, c: np.ndarray):
        c = np.asarray(c, dtype=np.float64)
        super().__init__(c.shape[0])
        self.c = c

    def _loss(self, x: np.ndarray) -> float:
        return float(np.dot(self.c, x))

    def _analytic_gradient(self, x: np.ndarray) -> np.ndarray:
        return self.c.copy()


@dataclass(frozen=True)
class LogitLandscapeSpec:
    """Config for the synthetic classification landscape.

    Logits are produced as W_out . tanh(M x') + b where M has rank
    ``hidden_rank`` and x' is the prompt plus a per-example perturbation.
    Non-verbalizer rows of the bias are offset upward so the verbalizer set
    starts with low global probability mass.
    """

    ambient_dim: int
    vocab_size: int
    verbalizer_ids: tuple[int, ...]
    hidden_rank: int
    n_examples: int = 16
    hidden_dim: int = 32
    distractor_bias: float = 3.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "verbalizer_ids", tuple(int(v) for v in self.verbalizer_ids))
        if not self.verbalizer_ids:
            raise InvalidInputError("verbalizer set is empty")
        if any(v < 0 or v >= self.vocab_size for v in self.verbalizer_ids):
            raise InvalidInputError("verbalizer id out of range")
        if not (0 < self.hidden_rank <= min(self.hidden_dim, self.ambient_dim)):
            raise InvalidInputError("hidden_rank out of range")


class LogitLandscapeObjective(BlackBoxObjective):
    """Deterministic low-rank logit generator with a fixed example set.

    Each example carries an input perturbation and a gold verbalizer; the
    loss is the mean cross-entropy (or confidence-regularized loss) over all
    examples.
    """

    def __init__(self, spec: LogitLandscapeSpec, loss: str = "ce", beta: float = 0.0):
        super().__init__(spec.ambient_dim)
        if loss not in ("ce", "cr"):
            raise InvalidInputError(f"loss must be 'ce' or 'cr', got {loss!r}")
        self.spec = spec
        self.loss = loss
        self.beta = float(beta)
        rng = np.random.default_rng(spec.seed)
        d, h, r = spec.ambient_dim, spec.hidden_dim, spec.hidden_rank
        left = rng.standard_normal((h, r)) / np.sqrt(r)
        right = rng.standard_normal((r, d)) / np.sqrt(d)
        self.mix = left @ right  # rank r by construction
        self.w_out = rng.standard_normal((spec.vocab_size, h)) / np.sqrt(h)
        bias = np.zeros(spec.vocab_size)
        distractors = np.setdiff1d(np.arange(spec.vocab_size), np.array(spec.verbalizer_ids))
        bias[distractors] = spec.distractor_bias
        self.bias = bias
        self.perturbations = rng.standard_normal((spec.n_examples, d))
        labels = np.array(spec.verbalizer_ids)
        self.labels = labels[rng.integers(0, len(labels), size=spec.n_examples)]

    def logits(self, x) -> np.ndarray:
        """Per-example logits, shape (n_examples, vocab_size)."""
        x = self._check(x)
        hidden = np.tanh((x + self.perturbations) @ self.mix.T)
        return hidden @ self.w_out.T + self.bias

    def bundles(self, x) -> list[LogitBundle]:
        return [
            LogitBundle(row, self.spec.verbalizer_ids, int(z))
            for row, z in zip(self.logits(x), self.labels)
        ]

    def _loss(self, x: np.ndarray) -> float:
        if self.loss == "ce":
            values = [cross_entropy_loss(b) for b in self.bundles(x)]
        else:
            values = [confidence_regularized_loss(b, self.beta) for b in self.bundles(x)]
        return float(np.mean(values))

    def with_loss(self, loss: str, beta: float = 0.0) -> "LogitLandscapeObjective":
        """Same landscape, different training loss; shares nothing mutable."""
        return LogitLandscapeObjective(self.spec, loss=loss, beta=beta)
