import numpy as np
import pytest

from promptsearch.analysis import (
    ConfidenceDiagnostics,
    DegenerateStudyError,
    confidence_diagnostics,
    gamma_op,
    gamma_pi,
    run_subspace_study,
)
from promptsearch.losses import LogitBundle
from promptsearch.objectives import QuadraticObjective, WeightedQuadraticObjective
from promptsearch.optimizers import BudgetSpec
from promptsearch.projection import SubspaceProjection


@pytest.fixture
def projection():
    return SubspaceProjection(30, 5, seed=0, x_init=np.ones(30))


class TestGammas:
    def test_gamma_op_zero_progress(self, projection):
        x_star = projection.x_init + 1.0
        assert gamma_op(x_star, np.zeros(5), projection) == 0.0

    def test_gamma_op_identical_progress(self, projection):
        y = np.random.default_rng(1).standard_normal(5)
        x_star = projection.lift(y)
        assert gamma_op(x_star, y, projection) == pytest.approx(1.0)

    def test_gamma_pi_zero_subspace_progress(self, projection):
        x_star = projection.x_init + 2.0
        assert gamma_pi(x_star, np.zeros(5), projection) == pytest.approx(1.0)

    def test_gamma_pi_exact_match(self, projection):
        y = np.random.default_rng(2).standard_normal(5)
        assert gamma_pi(projection.lift(y), y, projection) == pytest.approx(0.0, abs=1e-12)

    def test_degenerate_denominator(self, projection):
        with pytest.raises(DegenerateStudyError):
            gamma_op(projection.x_init, np.zeros(5), projection)
        with pytest.raises(DegenerateStudyError):
            gamma_pi(projection.x_init, np.zeros(5), projection)

    def test_orthogonal_invariance(self):
        rng = np.random.default_rng(3)
        proj = SubspaceProjection(20, 4, seed=4, x_init=rng.standard_normal(20))
        x_star = rng.standard_normal(20)
        y_star = rng.standard_normal(4)
        rot = np.linalg.qr(rng.standard_normal((20, 20)))[0]
        proj_rot = SubspaceProjection(20, 4, seed=4, x_init=rot @ proj.x_init)
        proj_rot.A = rot @ proj.A
        assert gamma_op(rot @ x_star, y_star, proj_rot) == pytest.approx(
            gamma_op(x_star, y_star, proj)
        )
        assert gamma_pi(rot @ x_star, y_star, proj_rot) == pytest.approx(
            gamma_pi(x_star, y_star, proj)
        )

    def test_triangle_sanity(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            proj = SubspaceProjection(15, 3, seed=rng.integers(1000))
            x_star = rng.standard_normal(15)
            y_star = rng.standard_normal(3)
            g_op = gamma_op(x_star, y_star, proj)
            g_pi = gamma_pi(x_star, y_star, proj)
            assert g_pi <= 1 + g_op + 1e-12
            assert g_op <= 1 + g_pi + 1e-12


class TestSubspaceStudy:
    def test_in_span_target(self):
        rng = np.random.default_rng(6)
        proj = SubspaceProjection(40, 8, seed=7)
        x_opt = proj.lift(rng.standard_normal(8))
        result = run_subspace_study(
            QuadraticObjective(x_opt), proj, BudgetSpec(6000), BudgetSpec(4000), seed=0
        )
        assert result.f_ps < 1e-6
        assert result.f_bbt < 1e-6
        assert result.gamma_pi < 0.1

    def test_off_span_weighted_target(self):
        rng = np.random.default_rng(8)
        d = 100
        proj = SubspaceProjection(d, 10, seed=9)
        x_opt = rng.standard_normal(d)
        weights = np.ones(d)
        weights[:15] = 100.0
        result = run_subspace_study(
            WeightedQuadraticObjective(x_opt, weights), proj,
            BudgetSpec(12_000), BudgetSpec(5_000), seed=1,
        )
        assert result.f_bbt > result.f_ps
        assert result.gamma_pi > 1.0
        y_oracle = proj.weighted_least_squares_solution(x_opt, weights)
        oracle = gamma_pi(x_opt, y_oracle, proj)
        assert result.gamma_pi == pytest.approx(oracle, rel=0.05)

    def test_zero_budget_rejected(self):
        proj = SubspaceProjection(10, 2, seed=0)
        with pytest.raises(Exception):
            run_subspace_study(
                QuadraticObjective(np.ones(10)), proj, BudgetSpec(0), BudgetSpec(10)
            )


class TestConfidenceDiagnostics:
    def test_strict_global_max_gives_rank_one(self):
        logits = np.array([5.0, 1.0, 0.0, -1.0])
        diag = confidence_diagnostics([LogitBundle(logits, (0, 1), 0)])
        assert diag.global_rank == 1.0

    def test_uniform_logits(self):
        n = 8
        diag = confidence_diagnostics([LogitBundle(np.zeros(n), (0, 1, 2), 0)])
        assert diag.prediction_probability == pytest.approx(1.0 / n)
        assert diag.global_rank == 1.0  # no strictly greater logits

    def test_empty_list_rejected(self):
        with pytest.raises(Exception):
            confidence_diagnostics([])

    def test_p_increases_with_verbalizer_offset(self):
        rng = np.random.default_rng(10)
        logits = rng.standard_normal(20)
        w = (0, 1, 2)
        base = confidence_diagnostics([LogitBundle(logits, w, 0)])
        boosted = logits.copy()
        boosted[list(w)] += 1.0
        up = confidence_diagnostics([LogitBundle(boosted, w, 0)])
        assert up.prediction_probability > base.prediction_probability

    def test_averages_over_examples(self):
        b1 = LogitBundle(np.array([1.0, 0.0, 0.0]), (0, 1), 0)
        b2 = LogitBundle(np.array([0.0, 0.0, 5.0]), (0, 1), 0)
        diag = confidence_diagnostics([b1, b2])
        assert diag.n_examples == 2
        assert 1.0 < diag.global_rank < 2.5
