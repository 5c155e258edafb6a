"""Frozen random-subspace reparameterization and step-size alignment.

The subspace method searches y in R^d_tilde and evaluates the base objective
at x_init + A y, with A fixed throughout.  Entries of A are i.i.d. uniform on
[-1/sqrt(d_tilde), +1/sqrt(d_tilde)], so E[A_ij^2] = 1/(3 d_tilde) and a
full-space Gaussian step of size sigma/sqrt(3) carries the same expected
update energy as a subspace Gaussian step of size sigma pushed through A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .objectives import BlackBoxObjective, InvalidInputError


class SubspaceProjection:
    """Frozen pair (A, x_init) defining an affine subspace of R^d.

    A and x_init are generated from the seed at construction and never
    mutated; two projections built from the same (d, d_tilde, seed,
    x_init) are identical.
    """

    def __init__(
        self,
        d: int,
        d_tilde: int,
        seed: int = 0,
        x_init: np.ndarray | None = None,
    ):
        if not (0 < d_tilde <= d):
            raise InvalidInputError(f"need 0 < d_tilde <= d, got d={d}, d_tilde={d_tilde}")
        self.d = int(d)
        self.d_tilde = int(d_tilde)
        self.seed = int(seed)
        rng = np.random.default_rng(seed)
        bound = 1.0 / math.sqrt(d_tilde)
        self.A = rng.uniform(-bound, bound, size=(d, d_tilde))
        if x_init is None:
            x_init = np.zeros(d)
        else:
            x_init = np.asarray(x_init, dtype=np.float64)
            if x_init.shape != (d,):
                raise InvalidInputError(f"x_init must have shape ({d},)")
        self.x_init = x_init

    def lift(self, y) -> np.ndarray:
        """Map subspace coordinates to the full space: x_init + A y."""
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.d_tilde,):
            raise InvalidInputError(
                f"expected subspace vector of length {self.d_tilde}, got shape {y.shape}"
            )
        return self.x_init + self.A @ y

    def wrap_objective(self, objective: BlackBoxObjective) -> "ProjectedObjective":
        return ProjectedObjective(self, objective)

    def least_squares_solution(self, x_target: np.ndarray) -> np.ndarray:
        """y minimizing ||lift(y) - x_target||; the subspace optimum of any
        isotropic quadratic centered at x_target."""
        y, *_ = np.linalg.lstsq(self.A, np.asarray(x_target) - self.x_init, rcond=None)
        return y

    def weighted_least_squares_solution(
        self, x_target: np.ndarray, weights: np.ndarray
    ) -> np.ndarray:
        """y minimizing sum_i w_i (lift(y) - x_target)_i^2; the subspace
        optimum of a diagonally weighted quadratic centered at x_target."""
        w = np.asarray(weights, dtype=np.float64)
        r = np.asarray(x_target, dtype=np.float64) - self.x_init
        return np.linalg.solve(self.A.T @ (w[:, None] * self.A), self.A.T @ (w * r))


class ProjectedObjective(BlackBoxObjective):
    """The base objective seen through the frozen subspace.

    Shares the base objective's evaluation counter: one wrapped evaluation is
    one base evaluation.
    """

    def __init__(self, projection: SubspaceProjection, base: BlackBoxObjective):
        if base.ambient_dim != projection.d:
            raise InvalidInputError(
                f"projection built for d={projection.d} but objective has "
                f"ambient_dim={base.ambient_dim}"
            )
        super().__init__(projection.d_tilde, counter=base.counter)
        self.projection = projection
        self.base = base

    def _loss(self, y: np.ndarray) -> float:
        return self.base._loss(self.projection.lift(y))


def monte_carlo_alignment(
    d: int, d_tilde: int, n_samples: int = 100_000, sigma_bbt: float = 1.0, seed: int = 0
) -> dict:
    """Monte Carlo check that a full-space Gaussian step of the aligned size
    carries the same expected squared norm as a subspace step through A.

    Returns the two energy estimates, their relative gap, and the empirical
    second moment of the A entries against its 1/(3 d_tilde) target in
    standard-error units.
    """
    rng = np.random.default_rng(seed)
    projection = SubspaceProjection(d, d_tilde, seed=seed)
    A = projection.A
    sigma_es = aligned_initial_step(sigma_bbt)

    gram = A.T @ A
    z = rng.standard_normal((n_samples, d_tilde))
    bbt_energy = float(np.mean(np.einsum("ij,jk,ik->i", z, gram, z))) * sigma_bbt**2
    es_energy = sigma_es**2 * float(np.mean(rng.chisquare(d, size=n_samples)))

    sq = A**2
    second_moment = float(sq.mean())
    target = 1.0 / (3.0 * d_tilde)
    se = float(sq.std(ddof=1)) / math.sqrt(sq.size)
    return {
        "es_energy": es_energy,
        "bbt_energy": bbt_energy,
        "relative_gap": abs(es_energy - bbt_energy) / bbt_energy,
        "second_moment": second_moment,
        "second_moment_target": target,
        "second_moment_se_units": abs(second_moment - target) / se,
    }


def aligned_initial_step(sigma_bbt: float) -> float:
    """Full-space step size whose expected update energy matches a subspace
    step of size ``sigma_bbt`` pushed through the uniform random projection:
    sigma_bbt / sqrt(3)."""
    if sigma_bbt <= 0:
        raise InvalidInputError(f"sigma_bbt must be positive, got {sigma_bbt}")
    return sigma_bbt / math.sqrt(3.0)
