import math

import numpy as np
import pytest

from promptsearch.objectives import LinearObjective, QuadraticObjective, SyntheticObjective, SyntheticObjectiveSpec
from promptsearch.optimizers import (
    BudgetSpec,
    DampingMode,
    InvalidSpecError,
    OnePlusOneES,
    SaES,
    StepSizeBlowupError,
    ZOSGD,
)


class TestDampingMode:
    def test_standard_tau(self):
        assert DampingMode("standard", d=51200).tau == pytest.approx(320.0)

    def test_id_aware_tau(self):
        mode = DampingMode("id_aware", d=10000, d_tilde=500)
        assert mode.tau == pytest.approx(31.6228, abs=1e-4)

    @pytest.mark.parametrize("d,dt", [(100, 10), (1000, 10), (100, 50), (51200, 500)])
    def test_tau_dependencies(self, d, dt):
        standard = DampingMode("standard", d=d).tau
        id_aware = DampingMode("id_aware", d=d, d_tilde=dt).tau
        assert standard == math.sqrt(2 * d)
        assert id_aware == math.sqrt(2 * dt)  # never depends on d

    def test_id_aware_requires_d_tilde(self):
        with pytest.raises(InvalidSpecError):
            DampingMode("id_aware", d=100)

    def test_unknown_variant(self):
        with pytest.raises(InvalidSpecError):
            DampingMode("adaptive", d=100)


class FixedLossObjective(QuadraticObjective):
    """Returns scripted losses regardless of input."""

    def __init__(self, d, losses):
        super().__init__(np.zeros(d))
        self.script = list(losses)

    def _loss(self, x):
        return self.script.pop(0)


class TestOnePlusOne:
    def test_sigma_update_on_success(self):
        obj = FixedLossObjective(3, [0.5])
        opt = OnePlusOneES(np.zeros(3), 1.0, sigma0=1.0, tau=10.0, seed=0)
        opt.step(obj)
        assert opt.sigma == pytest.approx(math.exp(0.08), abs=1e-6)

    def test_sigma_update_on_failure(self):
        obj = FixedLossObjective(3, [2.0])
        opt = OnePlusOneES(np.zeros(3), 1.0, sigma0=1.0, tau=10.0, seed=0)
        opt.step(obj)
        assert opt.sigma == pytest.approx(math.exp(-0.02), abs=1e-6)

    def test_tie_counts_as_success(self):
        obj = FixedLossObjective(3, [1.0])
        opt = OnePlusOneES(np.zeros(3), 1.0, sigma0=1.0, tau=10.0, seed=0)
        opt.step(obj)
        assert opt.sigma > 1.0

    def test_one_fifth_stationarity(self):
        # 1 success in 5 trials leaves sigma exactly unchanged
        obj = FixedLossObjective(3, [0.5, 9, 9, 9, 9])
        opt = OnePlusOneES(np.zeros(3), 1.0, sigma0=1.0, tau=7.0, seed=0)
        for _ in range(5):
            opt.step(obj)
        assert opt.sigma == pytest.approx(1.0, abs=1e-12)

    def test_one_eval_per_step(self):
        obj = QuadraticObjective(np.ones(5))
        opt = OnePlusOneES(np.zeros(5), obj._loss(np.zeros(5)), 0.5, tau=3.0, seed=1)
        for _ in range(7):
            opt.step(obj)
        assert obj.n_evals == 7

    def test_elitism(self):
        obj = QuadraticObjective(np.ones(8))
        opt = OnePlusOneES(np.zeros(8), obj._loss(np.zeros(8)), 0.5, tau=4.0, seed=2)
        losses = [opt.fx]
        for _ in range(200):
            opt.step(obj)
            losses.append(opt.fx)
        assert all(b <= a for a, b in zip(losses, losses[1:]))

    def test_sigma_blowup_guard(self):
        obj = FixedLossObjective(2, [0.0] * 50)
        opt = OnePlusOneES(np.zeros(2), 1.0, sigma0=1.0, tau=10.0, seed=0)
        opt.sigma = 1e299
        with pytest.raises(StepSizeBlowupError):
            for _ in range(50):
                opt.step(obj)


class TestSaES:
    def test_lambda_evals_per_step(self):
        obj = QuadraticObjective(np.ones(4))
        opt = SaES(np.zeros(4), 1.0, tau=5.0, lam=6, mu=2, seed=0)
        opt.step(obj)
        assert obj.n_evals == 6

    def test_mu_equals_lambda_plain_average(self):
        obj = QuadraticObjective(np.ones(4))
        opt = SaES(np.zeros(4), 1.0, tau=5.0, lam=5, mu=5, seed=3)
        rng_copy = np.random.default_rng(3)
        deltas = rng_copy.standard_normal(5)
        sigmas = 1.0 * np.exp(deltas / 5.0)
        trials = sigmas[:, None] * rng_copy.standard_normal((5, 4))
        opt.step(obj)
        np.testing.assert_allclose(opt.x, trials.mean(axis=0))
        assert opt.sigma == pytest.approx(sigmas.mean())

    def test_mu_one_takes_best_trial(self):
        obj = QuadraticObjective(np.ones(4))
        opt = SaES(np.zeros(4), 1.0, tau=5.0, lam=8, mu=1, seed=4)
        opt.step(obj)
        np.testing.assert_array_equal(opt.x, opt.best_x)
        assert obj._loss(opt.x) == opt.best_f

    def test_deterministic_trajectories(self):
        spec = SyntheticObjectiveSpec(ambient_dim=100, true_id=10, seed=0)

        def run():
            obj = SyntheticObjective(spec)
            opt = SaES(np.ones(100), 1.0, tau=4.47, lam=10, mu=3, seed=42)
            history = []
            for _ in range(20):
                report = opt.step(obj)
                history.append((tuple(report.trial_losses), opt.sigma))
            return history

        assert run() == run()

    def test_invalid_population(self):
        with pytest.raises(InvalidSpecError):
            SaES(np.zeros(3), 1.0, tau=2.0, lam=1, mu=1)
        with pytest.raises(InvalidSpecError):
            SaES(np.zeros(3), 1.0, tau=2.0, lam=4, mu=5)


class TestZOSGD:
    def test_unbiased_on_linear(self):
        c = np.array([1.0, -2.0, 3.0, 0.5])
        obj = LinearObjective(c)
        opt = ZOSGD(np.zeros(4), lr=0.1, smoothing=1e-6, q=4000, seed=0)
        g, _ = opt.estimate_gradient(obj)
        assert np.linalg.norm(g - c) / np.linalg.norm(c) < 0.1

    def test_quadratic_gradient_accuracy(self):
        rng = np.random.default_rng(0)
        x_opt = rng.standard_normal(10)
        obj = QuadraticObjective(x_opt)
        errors = []
        for seed in range(20):
            opt = ZOSGD(np.ones(10), lr=0.1, smoothing=1e-5, q=256, seed=seed)
            g, _ = opt.estimate_gradient(obj)
            g_true = obj.gradient(np.ones(10))
            errors.append(np.linalg.norm(g - g_true) / np.linalg.norm(g_true))
        assert np.median(errors) < 0.25

    def test_eval_accounting(self):
        obj = QuadraticObjective(np.ones(5))
        opt = ZOSGD(np.zeros(5), lr=0.1, smoothing=1e-4, q=16, seed=1)
        opt.step(obj)
        assert obj.n_evals == 17

    def test_q_zero_rejected(self):
        with pytest.raises(InvalidSpecError):
            ZOSGD(np.zeros(3), lr=0.1, smoothing=1e-4, q=0)

    def test_descends_on_quadratic(self):
        obj = QuadraticObjective(np.ones(10))
        opt = ZOSGD(np.zeros(10), lr=0.05, smoothing=1e-5, q=32, seed=2)
        f0 = obj._loss(opt.x)
        for _ in range(50):
            opt.step(obj)
        assert obj._loss(opt.x) < f0 / 2


class TestBudgetSpec:
    def test_defaults(self):
        assert BudgetSpec().max_evals == 5000

    def test_invalid(self):
        with pytest.raises(InvalidSpecError):
            BudgetSpec(max_evals=0)
