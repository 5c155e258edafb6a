import numpy as np
import pytest

from promptsearch.cmaes import DimensionGuardError, cmaes_run
from promptsearch.objectives import BlackBoxObjective, QuadraticObjective
from promptsearch.optimizers import BudgetSpec


class ConstantObjective(BlackBoxObjective):
    def _loss(self, x):
        return 1.0


def test_sphere_sanity():
    obj = QuadraticObjective(np.zeros(10))
    result = cmaes_run(obj, np.ones(10) * 3, 1.0, BudgetSpec(5000), seed=0)
    assert result.best_loss < 1e-8


def test_constant_objective_stays_sane():
    obj = ConstantObjective(8)
    result = cmaes_run(obj, np.zeros(8), 1.0, BudgetSpec(2000), seed=1)
    assert np.all(np.isfinite(result.best_x))
    final_sigma = result.trajectory[-1][2]
    assert final_sigma > 0


def test_dimension_guard():
    obj = QuadraticObjective(np.zeros(10_000))
    with pytest.raises(DimensionGuardError):
        cmaes_run(obj, np.zeros(10_000), 1.0, BudgetSpec(100))


def test_budget_respected():
    obj = QuadraticObjective(np.ones(6))
    result = cmaes_run(obj, np.zeros(6), 0.5, BudgetSpec(500), seed=2)
    assert result.evals <= 500
    assert obj.n_evals == result.evals


def test_target_loss_stops_early():
    obj = QuadraticObjective(np.zeros(5))
    result = cmaes_run(obj, np.ones(5), 1.0, BudgetSpec(5000, target_loss=1e-3), seed=3)
    assert result.best_loss <= 1e-3
    assert result.evals < 5000


def test_deterministic():
    def run():
        obj = QuadraticObjective(np.ones(7))
        return cmaes_run(obj, np.zeros(7), 1.0, BudgetSpec(300), seed=4)

    a, b = run(), run()
    assert a.best_loss == b.best_loss
    assert np.array_equal(a.best_x, b.best_x)
    assert a.trajectory == b.trajectory


def test_trajectory_monotone():
    obj = QuadraticObjective(np.ones(6))
    result = cmaes_run(obj, np.zeros(6), 1.0, BudgetSpec(600), seed=5)
    best = [rec[1] for rec in result.trajectory]
    assert all(b <= a for a, b in zip(best, best[1:]))
    indices = [rec[0] for rec in result.trajectory]
    assert indices == sorted(set(indices))
