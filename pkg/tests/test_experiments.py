import math

import numpy as np
import pytest

from oracles import spearman_brute
from rkdist.ball import PointSet
from rkdist import experiments
from rkdist.errors import DegenerateSample, RangeError, ValidationError
from rkdist.experiments import (
    REGISTRY,
    ExperimentSpec,
    blaschke_sequences,
    experiment_blaschke,
    experiment_counterexample_s_vs_h,
    experiment_hartz,
    experiment_main_theorem,
    experiment_nonuniform,
    hartz_max_k,
    perturbed,
    run_experiments,
    sweep_direction,
)


def metrics(out, key):
    return [r.metrics[key] for r in out.rows]


class TestCounterexample:
    @pytest.mark.parametrize("delta,t", [(0.005, 0.1), (0.001, 0.05)])
    def test_values(self, delta, t):
        out = experiment_counterexample_s_vs_h(delta, t)
        assert not out.failures
        row = out.rows[0].metrics
        assert abs(row["rho_s_euclidean"] - (t - delta)) <= 1e-12
        assert abs(row["rho_h_euclidean"] - delta / 2) <= 1e-12

    def test_small_t_metric_ratio(self):
        out = experiment_counterexample_s_vs_h(0.0005, 0.01)
        assert abs(out.rows[0].metrics["rho_h_ph"] / 0.00025 - 1) <= 0.05

    def test_range(self):
        with pytest.raises(RangeError):
            experiment_counterexample_s_vs_h(0.02, 0.1)


class TestBlaschke:
    def test_checks_pass(self):
        out = experiment_blaschke(0.1, 20)
        assert not out.failures
        assert out.rows[0].metrics["sup_rho_ph"] <= 0.1

    def test_sequences(self):
        x, y = blaschke_sequences(0.1, 5)
        np.testing.assert_array_equal((1 - x[1:]) / (1 - x[:-1]), 0.5)
        np.testing.assert_allclose((1 - y) / (1 - x), 1 - 0.1 ** np.arange(1, 6), rtol=1e-12)

    def test_guard(self):
        with pytest.raises(RangeError):
            experiment_blaschke(0.1, 41)
        with pytest.raises(RangeError):
            experiment_blaschke(1.0, 5)


class TestNonuniform:
    def test_growth(self):
        out = experiment_nonuniform(0.1, (0.1, 0.05, 0.01, 0.002))
        assert not out.failures
        d = metrics(out, "delta_rk")
        assert d[0] == pytest.approx(1, abs=1e-9)
        assert d[1] < d[2] < d[3]
        assert all(v <= 0.2 for v in metrics(out, "rho_tilde_s_bound"))
        assert metrics(out, "delta_rk_ge_alpha") == [0.0, 1.0, 1.0, 1.0]

    def test_range(self):
        with pytest.raises(RangeError):
            experiment_nonuniform(0.6, (0.1,))
        with pytest.raises(RangeError):
            experiment_nonuniform(0.1, (0.2,))


class TestHartz:
    def test_checks_and_trends(self):
        out = experiment_hartz(0.1, (4, 8, 12, 20))
        assert not out.failures
        assert metrics(out, "rho_ph_y")[2] == pytest.approx(1 / (3 - 2.0**-12), abs=1e-12)
        low = metrics(out, "rho_tilde_s_lower")
        assert low[-1] == pytest.approx((1 / 3 - 0.1) / 2, abs=1e-6)
        assert metrics(out, "delta_m_lower")[-1] == pytest.approx(5 / 3, abs=1e-5)

    def test_max_k(self):
        assert hartz_max_k() == 38
        experiment_hartz(0.1, (38,))
        with pytest.raises(RangeError):
            experiment_hartz(0.1, (39,))

    def test_range(self):
        with pytest.raises(RangeError):
            experiment_hartz(1 / 6, (4,))


class TestMainTheorem:
    def test_sweep(self):
        out = experiment_main_theorem()
        assert not out.failures
        rows = {r.inputs["s"]: r.metrics for r in out.rows}
        assert all(abs(v) <= 1e-6 for v in rows[0.0].values())
        scales = sorted(s for s in rows if s > 0)
        for key in ("rho_tilde_s", "log_delta_rk", "log_mult_lower", "log_mult_upper"):
            assert spearman_brute(scales, [rows[s][key] for s in scales]) >= 0.9
        for m in rows.values():
            assert m["log_mult_lower"] <= m["log_mult_upper"] + 1e-9

    def test_direction_is_seeded(self):
        X = PointSet([0, 0.3, 0.5j])
        np.testing.assert_array_equal(sweep_direction(X, (0.1,), 5), sweep_direction(X, (0.1,), 5))

    def test_clamp(self):
        X = PointSet([0, 0.3])
        P = perturbed(X, 10.0, np.ones((2, 1)))
        assert np.all(np.linalg.norm(P, axis=1) <= 0.98 + 1e-15)

    def test_degenerate(self, monkeypatch):
        X = PointSet([0, 0.3])
        # a direction that sends both points to 0.1 at s = 1
        monkeypatch.setattr(experiments, "_perturbation_direction", lambda X, rng: 0.1 - X.points)
        with pytest.raises(DegenerateSample):
            sweep_direction(X, (0.5, 1.0), 0)

    def test_size_limit(self):
        with pytest.raises(ValidationError):
            experiment_main_theorem(PointSet([0.1 * k for k in range(7)]))


def test_registry_runs_all():
    out = run_experiments(sorted(REGISTRY))
    assert out.rows and not out.failures
    assert {r.experiment for r in out.rows} == {"counterexample_s_vs_h", "blaschke", "nonuniform", "hartz", "main_theorem"}


def test_unknown_experiment():
    with pytest.raises(ValidationError):
        ExperimentSpec("nope")


def test_log_columns_are_logs():
    out = experiment_main_theorem(perturbation_scales=(0.05,))
    m = out.rows[0].metrics
    assert math.exp(m["log_mult_lower"]) >= 1 - 1e-12
