"""Intrinsic-dimension estimation of the gradient manifold.

Gradients of the objective are collected at random points, standardized, and
fed to the Levina-Bickel maximum-likelihood estimator computed on pairwise
cosine distances.  On embedded synthetic objectives the gradients live in a
known low-dimensional subspace, so the estimator can be validated against
ground truth.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .objectives import BlackBoxObjective, InvalidInputError
from .optimizers import InvalidSpecError


@dataclass
class NormalizationResult:
    matrix: np.ndarray
    zero_variance_coords: list[int]


@dataclass
class IDEstimate:
    """One cell of an estimate sweep."""

    prompt_length: int
    k: int
    n_samples: int
    d_hat: float
    dropped_duplicates: int
    zero_variance_coords: int
    error: str | None = None


def collect_gradients(
    objective: BlackBoxObjective,
    n: int,
    sampler: str = "seeded_normal",
    mode: str = "analytic",
    scale: float = 1.0,
    seed: int = 0,
) -> np.ndarray:
    """Gradients at ``n`` random points, shape (n_kept, d).

    ``uniform_token_like`` mimics sampling discrete tokens and casting to the
    continuous space (uniform per coordinate); ``seeded_normal`` draws
    Gaussian points.  Zero gradients are dropped with a warning.
    """
    if n < 2:
        raise InvalidSpecError("need at least 2 gradient samples")
    rng = np.random.default_rng(seed)
    d = objective.ambient_dim
    if sampler == "seeded_normal":
        points = scale * rng.standard_normal((n, d))
    elif sampler == "uniform_token_like":
        points = scale * rng.uniform(-1.0, 1.0, size=(n, d))
    else:
        raise InvalidSpecError(f"unknown sampler {sampler!r}")
    grads = np.array([objective.gradient(p, mode=mode) for p in points])
    norms = np.linalg.norm(grads, axis=1)
    keep = norms > 0
    dropped = int(n - keep.sum())
    if dropped:
        warnings.warn(f"dropped {dropped} zero-gradient samples", stacklevel=2)
    return grads[keep]


def normalize_gradients(
    grads: np.ndarray, per_coordinate: bool = True
) -> NormalizationResult:
    """Standardize the gradient set.

    Per-coordinate (default): subtract the coordinate mean and divide by the
    coordinate population std; zero-variance coordinates are left centered
    and flagged.  The per-vector alternative scales each row to unit norm
    after centering.
    """
    grads = np.asarray(grads, dtype=np.float64)
    if grads.ndim != 2 or grads.shape[0] < 2:
        raise InvalidInputError("need a 2-d sample matrix with at least 2 rows")
    centered = grads - grads.mean(axis=0)
    if per_coordinate:
        std = centered.std(axis=0)
        zero_var = np.flatnonzero(std == 0.0)
        safe = np.where(std == 0.0, 1.0, std)
        return NormalizationResult(centered / safe, list(map(int, zero_var)))
    norms = np.linalg.norm(centered, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return NormalizationResult(centered / norms, [])


def _cosine_distances(rows: np.ndarray) -> np.ndarray:
    # Chordal form sqrt(2 (1 - cos)): equals the Euclidean distance between
    # the unit-normalized rows, so it is locally proportional to the manifold
    # metric.  Raw 1 - cos is locally *quadratic* in the metric and would
    # halve every estimate.
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    unit = rows / norms
    sim = np.clip(unit @ unit.T, -1.0, 1.0)
    return np.sqrt(2.0 * (1.0 - sim))


def mle_intrinsic_dimension(
    normalized: np.ndarray, k: int, return_dropped: bool = False
) -> float | tuple[float, int]:
    """Levina-Bickel MLE on pairwise cosine distances.

    d_hat = mean over samples of [ (1/(k-1)) sum_{j<k} log(T_k / T_j) ]^{-1}
    where T_j is the j-th smallest cosine distance to the other samples.
    Duplicate rows (zero distance to a neighbor) are dropped, since their
    log terms are undefined.
    """
    normalized = np.asarray(normalized, dtype=np.float64)
    n = normalized.shape[0]
    if not (2 <= k < n):
        raise InvalidSpecError(f"need 2 <= k < n_samples, got k={k}, n={n}")
    dist = _cosine_distances(normalized)
    np.fill_diagonal(dist, np.inf)  # self excluded from neighbor lists
    # Sorting on (distance, index) keeps exact ties deterministic.
    part = np.sort(dist, axis=1)[:, :k]
    dup_rows = part[:, 0] <= 0.0
    dropped = int(dup_rows.sum())
    if dropped:
        warnings.warn(f"dropped {dropped} duplicate gradient rows", stacklevel=2)
        part = part[~dup_rows]
        if part.shape[0] == 0:
            raise InvalidInputError("all rows were duplicates")
    t_k = part[:, -1]
    logs = np.log(t_k[:, None] / part[:, :-1])
    inv = logs.mean(axis=1)
    d_hat = float(np.mean(1.0 / inv))
    if return_dropped:
        return d_hat, dropped
    return d_hat


def estimate_id(
    objective: BlackBoxObjective,
    prompt_length: int,
    k: int,
    n: int,
    sampler: str = "seeded_normal",
    mode: str = "analytic",
    per_coordinate: bool = True,
    seed: int = 0,
) -> IDEstimate:
    grads = collect_gradients(objective, n, sampler=sampler, mode=mode, seed=seed)
    norm = normalize_gradients(grads, per_coordinate=per_coordinate)
    d_hat, dropped = mle_intrinsic_dimension(norm.matrix, k, return_dropped=True)
    return IDEstimate(
        prompt_length=prompt_length,
        k=k,
        n_samples=grads.shape[0],
        d_hat=d_hat,
        dropped_duplicates=dropped,
        zero_variance_coords=len(norm.zero_variance_coords),
    )


def id_sweep(
    objective_factory,
    lengths: list[int],
    ks: list[int],
    n: int,
    sampler: str = "seeded_normal",
    mode: str = "analytic",
    seed: int = 0,
) -> list[IDEstimate]:
    """Full cross-product of (prompt length, k) estimates.

    ``objective_factory(l)`` builds the objective for prompt length ``l``;
    per-cell failures are recorded and the sweep continues.
    """
    report: list[IDEstimate] = []
    for length in lengths:
        objective = objective_factory(length)
        try:
            grads = collect_gradients(objective, n, sampler=sampler, mode=mode, seed=seed)
            norm = normalize_gradients(grads)
        except Exception as exc:  # per-cell failure, keep sweeping
            for k in ks:
                report.append(IDEstimate(length, k, 0, float("nan"), 0, 0, error=str(exc)))
            continue
        for k in ks:
            try:
                d_hat, dropped = mle_intrinsic_dimension(norm.matrix, k, return_dropped=True)
                report.append(
                    IDEstimate(
                        length, k, grads.shape[0], d_hat, dropped,
                        len(norm.zero_variance_coords),
                    )
                )
            except Exception as exc:
                report.append(IDEstimate(length, k, grads.shape[0], float("nan"), 0, 0, error=str(exc)))
    return report


def report_to_csv_rows(report: list[IDEstimate]) -> list[dict]:
    return [
        {
            "l": est.prompt_length,
            "k": est.k,
            "n_samples": est.n_samples,
            "d_hat": est.d_hat,
            "dropped_duplicates": est.dropped_duplicates,
            "zero_variance_coords": est.zero_variance_coords,
        }
        for est in report
    ]
