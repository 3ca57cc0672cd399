"""Worked examples and convergence studies, producing ResultRows plus the
checks that ``--check`` mode enforces."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import spearmanr

from .ball import BOUNDARY_MARGIN, DISTINCT_TOL, PointSet, pseudohyperbolic
from .config import OptimizerConfig
from .errors import DegenerateSample, RangeError, ValidationError
from .io import ResultRow
from .mult_bm import mult_bm_bracket, mult_discrepancy, two_point_mult_lower
from .rkhs_bm import rk_bm_distance
from .set_metrics import BaseMetric, Certificate, hausdorff, invariant_symmetric, symmetric, two_point_lower_bound

EXACT = Certificate.EXACT
UPPER = Certificate.UPPER_BOUND
LOWER = Certificate.LOWER_BOUND
MAX_K = 40
CLAMP_RADIUS = 0.98
MAX_RESAMPLES = 100
SPEARMAN_MIN = 0.9
ALPHA = 1.01


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Outcome:
    rows: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    def check(self, name, passed, detail=""):
        self.checks.append(Check(name, bool(passed), detail))

    def extend(self, other):
        self.rows.extend(other.rows)
        self.checks.extend(other.checks)
        return self

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]


def _strictly_decreasing(v):
    return all(a > b for a, b in zip(v, v[1:]))


def _strictly_increasing(v):
    return all(a < b for a, b in zip(v, v[1:]))


# --- Hausdorff versus symmetric distance -----------------------------------


def counterexample_sets(delta, t):
    X = PointSet([0.0, delta, t + delta / 2])
    Y = PointSet([delta / 2, t, t + delta])
    return X, Y


def experiment_counterexample_s_vs_h(delta=0.005, t=0.1):
    """X = {0, d, t + d/2}, Y = {d/2, t, t + d}: rho_s = t - d while rho_H = d/2."""
    if not 0.0 < delta < t / 10 < 0.1:
        raise RangeError(f"need 0 < delta < t/10 < 1/10, got delta={delta}, t={t}")
    X, Y = counterexample_sets(delta, t)
    out = Outcome()
    row = ResultRow("counterexample_s_vs_h", {"delta": delta, "t": t})
    rs, _ = symmetric(X, Y, BaseMetric.EUCLIDEAN)
    rh = hausdorff(X, Y, BaseMetric.EUCLIDEAN)
    ps, _ = symmetric(X, Y)
    ph = hausdorff(X, Y)
    row.add("rho_s_euclidean", rs, EXACT)
    row.add("rho_h_euclidean", rh, EXACT)
    row.add("rho_s_ph", ps, EXACT)
    row.add("rho_h_ph", ph, EXACT)
    row.add("ph_over_euclidean_h", ph / rh, EXACT)
    out.rows.append(row)
    tag = f"delta={delta},t={t}"
    out.check(f"counterexample rho_s = t - delta [{tag}]", abs(rs - (t - delta)) <= 1e-12, repr(rs))
    out.check(f"counterexample rho_H = delta/2 [{tag}]", abs(rh - delta / 2) <= 1e-12, repr(rh))
    if t <= 0.01:
        out.check(f"counterexample ph rho_H within 5% of delta/2 [{tag}]", abs(ph / (delta / 2) - 1) <= 0.05, repr(ph))
    return out


# --- interpolating sequences -----------------------------------------------


def blaschke_sequences(eps, K):
    k = np.arange(1, K + 1, dtype=float)
    x = 1.0 - 2.0**-k
    y = 1.0 - (1.0 - eps**k) * 2.0**-k
    return x, y


def experiment_blaschke(eps=0.1, K=20):
    """Truncations of x_k = 1 - 2^-k and y_k = 1 - (1 - eps^k) 2^-k.

    Both sequences satisfy the Hayman-Newman ratio condition on their own
    (ratio 1/2); the interleaved sequence W has ratios tending to 1.
    """
    if not 0.0 < eps < 1.0:
        raise RangeError(f"eps must lie in (0, 1), got {eps}")
    if not 1 <= K <= MAX_K:
        raise RangeError(f"K must lie in 1..{MAX_K} (1 - x_K drops below 1e-12 beyond), got {K}")
    x, y = blaschke_sequences(eps, K)
    rho = np.array([pseudohyperbolic(a, b) for a, b in zip(x, y)])
    v_ratios = (1.0 - x[1:]) / (1.0 - x[:-1])
    # interleaved x_1, y_1, x_2, y_2, ...: (1-y_k)/(1-x_k) and (1-x_{k+1})/(1-y_k)
    w_inner = (1.0 - y) / (1.0 - x)
    w_cross = (1.0 - x[1:]) / (1.0 - y[:-1])
    w_ratios = np.empty(2 * K - 1)
    w_ratios[0::2] = w_inner
    w_ratios[1::2] = w_cross
    out = Outcome()
    row = ResultRow("blaschke", {"eps": eps, "K": K})
    row.add("sup_rho_ph", rho.max(), EXACT)
    row.add("v_ratio_max", v_ratios.max() if K > 1 else 0.5, EXACT)
    row.add("v_ratio_min", v_ratios.min() if K > 1 else 0.5, EXACT)
    row.add("w_ratio_max", w_ratios.max(), EXACT)
    row.add("w_ratio_last", w_inner[-1], EXACT)
    out.rows.append(row)
    tag = f"eps={eps},K={K}"
    out.check(f"blaschke sup rho_ph <= eps [{tag}]", rho.max() <= eps, repr(float(rho.max())))
    out.check(f"blaschke V-ratios equal 1/2 [{tag}]", bool(np.all(v_ratios == 0.5)))
    # 1 - eps^k rounds to 1 once eps^k < 2^-53, so the trend is only non-decreasing
    out.check(
        f"blaschke W-ratios increase to 1 [{tag}]",
        bool(np.all(np.diff(w_inner) >= 0)) and abs(w_inner[-1] - (1.0 - eps**K)) <= 1e-15,
        repr(float(w_inner[-1])),
    )
    return out


# --- RK distance is not uniformly continuous -------------------------------


def experiment_nonuniform(x=0.1, y_list=(0.05, 0.01, 0.002), cfg=None):
    """X = {0, x}, Y = {0, y}: small sets, hence small rho~_s, yet delta_RK blows up."""
    cfg = cfg or OptimizerConfig()
    if not 0.0 < x < 0.5 or not all(0.0 < y <= x for y in y_list):
        raise RangeError(f"need 0 < y <= x < 1/2, got x={x}, y_list={list(y_list)}")
    out = Outcome()
    X = PointSet([0.0, x])
    deltas = []
    for y in y_list:
        rk = rk_bm_distance(X, PointSet([0.0, y]), cfg)
        deltas.append(rk.delta)
        row = ResultRow("nonuniform", {"x": x, "y": y})
        row.add("delta_rk", rk.delta, UPPER)
        row.add("rho_tilde_s_bound", 2.0 * max(x, y), UPPER)
        row.add("delta_rk_ge_alpha", float(rk.delta >= ALPHA), EXACT)
        out.rows.append(row)
        out.check(f"nonuniform rho~_s bound <= 2x [y={y}]", 2.0 * max(x, y) <= 2.0 * x)
        if y == x:
            out.check(f"nonuniform delta = 1 at y = x [y={y}]", abs(rk.delta - 1.0) <= 1e-9, repr(rk.delta))
    order = np.argsort(-np.asarray(y_list), kind="stable")
    out.check("nonuniform delta grows as y shrinks", _strictly_increasing([deltas[i] for i in order]))
    return out


# --- Hartz's example --------------------------------------------------------


def hartz_sets(r, k):
    return PointSet([0.0, r]), PointSet([1.0 - 2.0**-k, 1.0 - 2.0 ** -(k + 1)])


def hartz_max_k():
    """Largest k with 1 - 2^-(k+1) still a valid ball point."""
    k = 1
    while 1.0 - 2.0 ** -(k + 2) < 1.0 - BOUNDARY_MARGIN:
        k += 1
    return k


def experiment_hartz(r=0.1, k_list=(4, 8, 10, 12, 16, 20), cfg=None):
    """X = {0, r}, Y_k = {1 - 2^-k, 1 - 2^-(k+1)}."""
    cfg = cfg or OptimizerConfig()
    if not 0.0 < r < 1.0 / 6.0:
        raise RangeError(f"r must lie in (0, 1/6), got {r}")
    kmax = min(MAX_K, hartz_max_k())
    if not all(1 <= k <= kmax for k in k_list):
        raise RangeError(f"k must lie in 1..{kmax}, got {list(k_list)}")
    out = Outcome()
    disc, lowers = [], []
    for k in k_list:
        X, Y = hartz_sets(r, k)
        value, _ = mult_discrepancy(X, Y)
        rho_y = pseudohyperbolic(Y[0], Y[1])
        tpl = two_point_mult_lower(X, Y)
        bracket = mult_bm_bracket(X, Y, cfg)
        disc.append(value)
        lowers.append(tpl)
        row = ResultRow("hartz", {"r": r, "k": k})
        row.add("mult_discrepancy", value, EXACT)
        row.add("rho_tilde_s_lower", two_point_lower_bound(X, Y), LOWER)
        row.add("delta_m_lower", tpl, LOWER)
        row.add("delta_m_upper", bracket.upper, UPPER)
        row.add("rho_ph_y", rho_y, EXACT)
        out.rows.append(row)
        closed = 1.0 / (3.0 - 2.0**-k)
        out.check(f"hartz rho_ph(y_k, y_k+1) = 1/(3 - 2^-k) [k={k}]", abs(rho_y - closed) <= 1e-12, repr(rho_y))
        out.check(f"hartz bracket lower <= upper [k={k}]", max(value, tpl) <= bracket.upper + 1e-9)
    order = np.argsort(k_list, kind="stable")
    out.check("hartz mult_discrepancy strictly decreasing in k", _strictly_decreasing([disc[i] for i in order]))
    kbig = max(k_list)
    if kbig >= 20:
        limit = 1.0 / (6.0 * r)
        got = lowers[list(k_list).index(kbig)]
        out.check(f"hartz two_point_mult_lower within 0.01 of 1/(6r) [k={kbig}]", abs(got - limit) <= 0.01, repr(got))
    return out


# --- main theorem sweep -----------------------------------------------------


def _perturbation_direction(X, rng):
    return rng.standard_normal(X.points.shape) + 1j * rng.standard_normal(X.points.shape)


def perturbed(X, s, G):
    """X + s G, rows radially clamped to norm <= 0.98."""
    P = X.points + s * G
    norms = np.linalg.norm(P, axis=1, keepdims=True)
    return P * np.minimum(1.0, CLAMP_RADIUS / np.maximum(norms, 1e-300))


def _is_distinct(P):
    diff = np.linalg.norm(P[:, None, :] - P[None, :, :], axis=2)
    np.fill_diagonal(diff, np.inf)
    return np.min(diff) > DISTINCT_TOL


def sweep_direction(X, scales, seed):
    """One seeded complex Gaussian direction, redrawn until every scale keeps the points distinct."""
    rng = np.random.default_rng([seed, 101])
    for _ in range(MAX_RESAMPLES):
        G = _perturbation_direction(X, rng)
        if all(_is_distinct(perturbed(X, s, G)) for s in scales):
            return G
    raise DegenerateSample(f"perturbation collided points in {MAX_RESAMPLES} draws")


MAIN_THEOREM_POINTS = (0.0, 0.3, 0.5j)


def experiment_main_theorem(X=None, perturbation_scales=(0.1, 0.05, 0.01, 0.001, 0.0), seed=0, cfg=None):
    """Y_s = X + s G for a fixed seeded direction G; all distances should shrink with s."""
    X = PointSet(list(MAIN_THEOREM_POINTS)) if X is None else X
    cfg = cfg or OptimizerConfig(seed=seed)
    if X.n > 6:
        raise ValidationError(f"main theorem sweep supports n <= 6, got {X.n}")
    if any(s < 0 for s in perturbation_scales):
        raise RangeError("perturbation scales must be nonnegative")
    G = sweep_direction(X, perturbation_scales, seed)
    out = Outcome()
    cols = {"rho_tilde_s": [], "log_delta_rk": [], "log_mult_lower": [], "log_mult_upper": []}
    for s in perturbation_scales:
        Y = PointSet(perturbed(X, s, G))
        inv = invariant_symmetric(X, Y, cfg)
        bracket = mult_bm_bracket(X, Y, cfg)
        vals = {
            "rho_tilde_s": inv.value,
            "log_delta_rk": bracket.upper_source.rho,
            "log_mult_lower": math.log(bracket.lower),
            "log_mult_upper": math.log(bracket.upper),
        }
        row = ResultRow("main_theorem", {"s": float(s), "seed": seed, "n": X.n, "d": X.dim})
        row.add("rho_tilde_s", vals["rho_tilde_s"], UPPER)
        row.add("log_delta_rk", vals["log_delta_rk"], UPPER)
        row.add("log_mult_lower", vals["log_mult_lower"], LOWER)
        row.add("log_mult_upper", vals["log_mult_upper"], UPPER)
        out.rows.append(row)
        for k, v in vals.items():
            cols[k].append(v)
        out.check(f"main_theorem bracket lower <= upper [s={s}]", bracket.lower <= bracket.upper + 1e-9)
        if s == 0:
            out.check("main_theorem s = 0 row vanishes", all(abs(v) <= 1e-6 for v in vals.values()), repr(vals))
    if len(set(perturbation_scales)) >= 3:
        for k, v in cols.items():
            rho = spearmanr(perturbation_scales, v).statistic
            out.check(f"main_theorem Spearman(s, {k}) >= {SPEARMAN_MIN}", rho >= SPEARMAN_MIN, f"{rho:.4f}")
    return out


# --- registry ---------------------------------------------------------------


def _run_counterexamples(cfg):
    out = Outcome()
    for delta, t in ((0.005, 0.1), (0.001, 0.05), (0.0005, 0.01)):
        out.extend(experiment_counterexample_s_vs_h(delta, t))
    return out


REGISTRY = {
    "counterexample_s_vs_h": _run_counterexamples,
    "blaschke": lambda cfg: experiment_blaschke(0.1, 20),
    "nonuniform": lambda cfg: experiment_nonuniform(0.1, (0.1, 0.05, 0.01, 0.002), cfg),
    "hartz": lambda cfg: experiment_hartz(0.1, (4, 8, 10, 12, 16, 20), cfg),
    "main_theorem": lambda cfg: experiment_main_theorem(seed=cfg.seed, cfg=cfg),
}


@dataclass
class ExperimentSpec:
    name: str
    params: dict = field(default_factory=dict)
    output_path: str = ""

    def __post_init__(self):
        if self.name not in REGISTRY:
            raise ValidationError(f"unknown experiment {self.name!r}; choose from {sorted(REGISTRY)}")

    def run(self, cfg=None):
        cfg = cfg or OptimizerConfig(**{k: v for k, v in self.params.items() if k == "seed"})
        return REGISTRY[self.name](cfg)


def run_experiments(names, cfg=None):
    cfg = cfg or OptimizerConfig()
    out = Outcome()
    for name in names:
        out.extend(ExperimentSpec(name).run(cfg))
    return out
