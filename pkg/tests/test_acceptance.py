"""End-to-end acceptance criteria, each with its tolerance and time budget.

Every test records PASS or FAIL under its criterion number; the lines are
printed in the pytest terminal summary.
"""

import contextlib
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from oracles import pick_bisection, tail_matrix
from rkdist.alignment import procrustes, procrustes_bound_check, singular_value_residual
from rkdist.ball import PointSet, apply_set, pseudohyperbolic, random_automorphism, random_ball_point, random_pointset
from rkdist.config import OptimizerConfig
from rkdist.experiments import counterexample_sets, experiment_hartz, experiment_main_theorem, hartz_sets
from rkdist.kernels import inner_product_matrix, schur_power_sum, self_condition, tail_condition
from rkdist.kernels import truncation_order_self, truncation_order_tail
from rkdist.linalg_core import is_psd
from rkdist.mult_bm import PickInstance, min_multiplier_norm, mult_discrepancy, two_point_mult_lower
from rkdist.rkhs_bm import rk_bm_distance, rk_bound_from_sets
from rkdist.set_metrics import BaseMetric, hausdorff, invariant_symmetric, min_separation, symmetric


@contextlib.contextmanager
def criterion(number, title, budget):
    """Time the block, record PASS/FAIL, and fail the test if the budget is blown."""
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE[number] = ("FAIL", title, time.perf_counter() - start, f"[{type(exc).__name__}: {exc}]"[:200])
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < budget
    ACCEPTANCE[number] = ("PASS" if ok else "FAIL", title, elapsed, "" if ok else f"[over budget {budget} s]")
    assert ok, f"criterion {number} took {elapsed:.3f} s, budget {budget} s"


def complex_noise(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_01_counterexample():
    title = "counterexample rho_s = 0.095, rho_H = 0.0025"
    X, Y = counterexample_sets(0.005, 0.1)
    symmetric(X, Y, BaseMetric.EUCLIDEAN)  # warm up; the budget is for the computation itself
    timings = []
    for _ in range(5):
        t0 = time.perf_counter()
        rs, _ = symmetric(X, Y, BaseMetric.EUCLIDEAN)
        rh = hausdorff(X, Y, BaseMetric.EUCLIDEAN)
        timings.append(time.perf_counter() - t0)
    ok = abs(rs - 0.095) <= 1e-12 and abs(rh - 0.0025) <= 1e-12 and min(timings) < 1e-3
    ACCEPTANCE[1] = ("PASS" if ok else "FAIL", title, min(timings), "")
    assert ok, (rs, rh, timings)


def test_02_hausdorff_vs_symmetric():
    rng = np.random.default_rng(2)
    with criterion(2, "rho_H <= rho_s on 1000 instances; equality below half separation", 5.0):
        violations, equal_cases = 0, 0
        for _ in range(1000):
            n, d = int(rng.integers(1, 7)), int(rng.integers(1, 4))
            X, Y = random_pointset(n, d, rng), random_pointset(n, d, rng)
            for m in BaseMetric:
                violations += hausdorff(X, Y, m) > symmetric(X, Y, m)[0] + 1e-12
        assert violations == 0
        for _ in range(1000):
            n, d = int(rng.integers(2, 7)), int(rng.integers(1, 4))
            X = random_pointset(n, d, rng, radius=0.8)
            Y = PointSet(X.points + 10.0 ** rng.uniform(-5, -2) * complex_noise(rng, X.points.shape))
            h = hausdorff(X, Y)
            if h < min_separation(X) / 2:
                equal_cases += 1
                assert symmetric(X, Y)[0] == h
        assert equal_cases >= 500


def test_03_congruence_invariance():
    rng = np.random.default_rng(3)
    cfg = OptimizerConfig(random_restarts=16)
    with criterion(3, "congruent sets: rho~_s <= 1e-5, delta_RK <= 1 + 1e-5, delta_mult <= 1 + 1e-8", 60.0):
        for _ in range(100):
            n, d = int(rng.integers(2, 6)), int(rng.integers(1, 4))
            X = random_pointset(n, d, rng)
            Y = apply_set(random_automorphism(d, rng), X)
            assert invariant_symmetric(X, Y, cfg).value <= 1e-5
            assert rk_bm_distance(X, Y, cfg).delta <= 1 + 1e-5
            assert mult_discrepancy(X, Y)[0] <= 1 + 1e-8


def test_04_rk_bound():
    rng = np.random.default_rng(4)
    with criterion(4, "delta_RK <= rk_bound_from_sets + 1e-6 on 200 perturbed pairs", 120.0):
        worst = -np.inf
        for i in range(200):
            n, d = 2 + i % 4, 1 + i % 3
            X = random_pointset(n, d, rng, radius=0.8)
            Y = PointSet(X.points + 10.0 ** rng.uniform(-4, -1.5) * complex_noise(rng, X.points.shape))
            gap = rk_bm_distance(X, Y).delta - rk_bound_from_sets(X, Y)
            worst = max(worst, gap)
        assert worst <= 1e-6


def test_05_procrustes():
    rng = np.random.default_rng(5)
    with criterion(5, "Procrustes singular-value identity and residual bound, 500 instances", 10.0):
        for _ in range(500):
            d, n = int(rng.integers(1, 5)), int(rng.integers(1, 9))
            A = 0.3 * complex_noise(rng, (d, n)) / np.sqrt(2 * d)
            U, _ = np.linalg.qr(complex_noise(rng, (d, d)))
            B = U @ (A + 10.0 ** rng.uniform(-6, -1) * complex_noise(rng, (d, n)))
            _, res = procrustes(A, B)
            assert abs(res**2 - singular_value_residual(A, B)) <= 1e-9
            gap = np.linalg.norm(A.conj().T @ A - B.conj().T @ B)
            assert procrustes_bound_check(A, B, gap * 1.01 + 1e-300)


def test_06_truncation():
    rng = np.random.default_rng(6)
    with criterion(6, "truncation orders minimal and sound; 100 Monte-Carlo tuples each", 60.0):
        for _ in range(50):
            n, d = int(rng.integers(1, 6)), int(rng.integers(1, 4))
            V = random_pointset(n, d, rng, radius=0.85)
            r = float(rng.uniform(0.3, 0.9))
            A = inner_product_matrix(V)
            for eps in (0.5, 0.1, 0.01):
                N = truncation_order_self(V, eps)
                assert self_condition(V, eps, N)
                assert N == 0 or not self_condition(V, eps, N - 1)
                Nt = truncation_order_tail(V, r, eps)
                assert tail_condition(A, r, eps, Nt)
                S = eps * schur_power_sum(A, Nt)
                for _ in range(100):
                    U = np.array([random_ball_point(d, rng, r) for _ in range(n)])
                    assert is_psd(S - tail_matrix(U, Nt), 1e-12)


def test_07_pick():
    rng = np.random.default_rng(7)
    with criterion(7, "Pick pencil equals bisection oracle to 1e-9; hand example 0.5", 5.0):
        for _ in range(100):
            n, d, m = int(rng.integers(1, 6)), int(rng.integers(1, 4)), int(rng.integers(1, 3))
            X = random_pointset(n, d, rng)
            T = complex_noise(rng, (n, m))
            assert abs(min_multiplier_norm(PickInstance(X, T)) - pick_bisection(X.points, T)) <= 1e-9
        assert abs(min_multiplier_norm(PickInstance(PointSet([0, 0.5]), [0, 0.25])) - 0.5) <= 1e-10


def test_08_hartz():
    with criterion(8, "Hartz example at r = 0.1", 10.0):
        X, Y = hartz_sets(0.1, 10)
        assert abs(pseudohyperbolic(Y[0], Y[1]) - 1 / (3 - 2.0**-10)) <= 1e-12
        X, Y = hartz_sets(0.1, 20)
        assert abs(two_point_mult_lower(X, Y) - 5 / 3) <= 0.01
        vals = [mult_discrepancy(*hartz_sets(0.1, k))[0] for k in (4, 8, 12)]
        assert vals[0] > vals[1] > vals[2]
        assert not experiment_hartz(0.1, (4, 8, 12, 20)).failures


def test_09_main_theorem():
    with criterion(9, "main-theorem sweep: Spearman >= 0.9 per column, s = 0 row vanishes", 300.0):
        out = experiment_main_theorem(perturbation_scales=(0.1, 0.05, 0.01, 0.001, 0.0), seed=0)
        assert not out.failures, [c.name for c in out.failures]
        zero = [r for r in out.rows if r.inputs["s"] == 0.0][0]
        assert all(abs(v) <= 1e-6 for v in zero.metrics.values())


@pytest.mark.parametrize("fmt", ["csv"])
def test_10_determinism(fmt):
    cmd = [sys.executable, "-m", "rkdist", "experiment", "all", "--check", "--seed", "0", "--format", fmt]
    with criterion(10, "two --check runs give byte-identical reports", 600.0):
        a = subprocess.run(cmd, capture_output=True)
        b = subprocess.run(cmd, capture_output=True)
        assert a.returncode == 0 and b.returncode == 0, a.stderr.decode()[-500:]
        assert a.stdout == b.stdout and a.stdout
        assert a.stderr == b.stderr
