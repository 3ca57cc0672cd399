"""Pick interpolation norms, the multiplier discrepancy and brackets for the
multiplier Banach-Mazur distance.

On the Drury-Arveson space a row multiplier of norm <= C interpolating
x_i -> t_i exists iff [(C^2 - <t_i, t_j>) k(x_i, x_j)] is PSD, so the minimal
norm is the square root of the top eigenvalue of the pencil (Q, K) with
Q_ij = <t_i, t_j> k(x_i, x_j).
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .ball import PointSet, pseudohyperbolic
from .config import OptimizerConfig
from .errors import CardinalityMismatch, DimError, ValidationError
from .kernels import gram
from .linalg_core import as_hermitian, congruence_factor, pencil_eigenvalues
from .rkhs_bm import RkBmReport, rk_bm_distance
from .set_metrics import BaseMetric, Certificate, invariant_matchings, symmetric

EXHAUSTIVE_MAX_N = 8


@dataclass
class PickInstance:
    nodes: PointSet
    targets: np.ndarray

    def __post_init__(self):
        T = np.asarray(self.targets, dtype=complex)
        if T.ndim == 1:
            T = T[:, None]
        if T.ndim != 2 or T.shape[0] != self.nodes.n:
            raise ValidationError(
                f"need one target vector per node: {self.nodes.n} nodes, targets of shape {T.shape}"
            )
        if T.shape[1] < 1:
            raise ValidationError("targets must have length m >= 1")
        if not np.all(np.isfinite(T)):
            raise ValidationError("targets must be finite")
        self.targets = T

    def pick_matrix(self, C):
        """[(C^2 - <t_i, t_j>) k(x_i, x_j)]."""
        T = self.targets
        return as_hermitian((C * C - T @ T.conj().T) * gram(self.nodes))


def min_multiplier_norm(inst):
    """Smallest C >= 0 with a row multiplier of norm C interpolating nodes -> targets."""
    K = gram(inst.nodes)
    T = inst.targets
    Q = (T @ T.conj().T) * K
    if not np.any(Q):
        return 0.0
    top = pencil_eigenvalues(Q, K)[-1]
    return math.sqrt(max(top, 0.0))


class _Factor:
    """Top pencil eigenvalue against a fixed kernel matrix K."""

    def __init__(self, K):
        self.M = congruence_factor(K)

    def top(self, Q):
        S = self.M @ Q @ self.M.conj().T
        return float(np.linalg.eigvalsh(0.5 * (S + S.conj().T))[-1])


class _Discrepancy:
    """max of the forward and backward interpolation norms for a bijection."""

    def __init__(self, X, Y):
        self.KX, self.KY = gram(X), gram(Y)
        self.PX = X.points @ X.points.conj().T
        self.PY = Y.points @ Y.points.conj().T
        self.fx, self.fy = _Factor(self.KX), _Factor(self.KY)

    def norms(self, sigma):
        sigma = np.asarray(sigma)
        inv = np.argsort(sigma)
        # X -> Y o sigma: nodes x_i, targets y_sigma(i)
        fwd = self.fx.top(self.PY[np.ix_(sigma, sigma)] * self.KX)
        # Y o sigma -> X, relabelled to the order of Y: nodes y_j, targets x_inv(j)
        bwd = self.fy.top(self.PX[np.ix_(inv, inv)] * self.KY)
        return math.sqrt(max(fwd, 0.0)), math.sqrt(max(bwd, 0.0))

    def __call__(self, sigma):
        return max(self.norms(sigma))


def _check_pair(X, Y):
    if X.n != Y.n:
        raise CardinalityMismatch(f"|X| = {X.n} but |Y| = {Y.n}")
    if X.dim != Y.dim:
        raise DimError(f"X lives in C^{X.dim}, Y in C^{Y.dim}")


def _local_permutation_search(f, start, cfg):
    """Best-improvement descent over transpositions, restarted from random walks."""
    n = len(start)
    rng = np.random.default_rng([cfg.seed, 31])
    best = (f(start), list(start))
    starts = [list(start)]
    for _ in range(min(cfg.random_restarts, 16)):
        p = list(start)
        for _ in range(n):
            i, j = rng.choice(n, size=2, replace=False)
            p[i], p[j] = p[j], p[i]
        starts.append(p)
    for cur in starts:
        val = f(cur)
        improved = True
        while improved:
            improved = False
            for i, j in itertools.combinations(range(n), 2):
                nxt = list(cur)
                nxt[i], nxt[j] = nxt[j], nxt[i]
                v = f(nxt)
                if v < val:
                    cur, val, improved = nxt, v, True
        if (val, cur) < best:
            best = (val, cur)
    return best


def mult_discrepancy_report(X, Y, cfg=None):
    """(value, sigma, certificate): EXACT when every bijection was examined."""
    _check_pair(X, Y)
    f = _Discrepancy(X, Y)
    n = X.n
    if n <= EXHAUSTIVE_MAX_N:
        best_val, best_sigma = np.inf, None
        for sigma in itertools.permutations(range(n)):
            v = f(sigma)
            if v < best_val:
                best_val, best_sigma = v, list(sigma)
        return best_val, best_sigma, Certificate.EXACT
    _, nearest = symmetric(X, Y, BaseMetric.PSEUDOHYPERBOLIC)
    start = min([list(nearest)] + invariant_matchings(X, Y), key=lambda s: (f(s), s))
    val, sigma = _local_permutation_search(f, start, cfg or OptimizerConfig())
    return val, sigma, Certificate.UPPER_BOUND


def mult_discrepancy(X, Y, cfg=None):
    """min over bijections of the larger minimal interpolation norm, X -> Y and back."""
    val, sigma, _ = mult_discrepancy_report(X, Y, cfg)
    return val, sigma


def interpolation_norms(X, Y, sigma):
    """(forward, backward) minimal norms for the bijection x_i -> y_sigma(i)."""
    _check_pair(X, Y)
    return _Discrepancy(X, Y).norms(sigma)


@dataclass
class MultBmBracket:
    lower: float
    upper: float
    lower_witness: dict
    upper_source: RkBmReport
    lower_certificate: Certificate = Certificate.EXACT
    upper_log_squared: float = float("nan")

    @property
    def certificate(self):
        return Certificate.BRACKET

    def as_dict(self):
        return {
            "lower": self.lower,
            "upper": self.upper,
            "certificate": self.certificate.value,
            "lower_certificate": self.lower_certificate.value,
            "lower_witness": self.lower_witness,
            "upper_log_squared": self.upper_log_squared,
            "rk": self.upper_source.as_dict(),
        }


def mult_bm_bracket(X, Y, cfg=None):
    """[delta_mult, delta_RK^2] around the multiplier Banach-Mazur distance.

    The upper end comes from ||phi||_cb <= ||T|| ||T^-1|| for the composition
    map induced by an RKHS isomorphism T, applied to phi and its inverse.
    ``upper_log_squared`` keeps exp((log delta_RK)^2) for comparison; it is not
    used as a bound.  When the discrepancy is only an upper estimate (n > 8)
    the lower end loses its certificate, see ``lower_certificate``.
    """
    cfg = cfg or OptimizerConfig()
    value, sigma, cert = mult_discrepancy_report(X, Y, cfg)
    fwd, bwd = interpolation_norms(X, Y, sigma)
    rk = rk_bm_distance(X, Y, cfg)
    upper = rk.delta**2
    return MultBmBracket(
        lower=float(value),
        upper=float(max(upper, value)) if cert is Certificate.UPPER_BOUND else float(upper),
        lower_witness={"sigma": sigma, "forward_norm": fwd, "backward_norm": bwd},
        upper_source=rk,
        lower_certificate=cert,
        upper_log_squared=math.exp(rk.rho**2),
    )


def two_point_mult_lower(X, Y):
    """max(1, rho(y1,y2) / (2 rho(x1,x2)), rho(x1,x2) / (2 rho(y1,y2))).

    A lower bound for the multiplier distance between two-point sets, from the
    estimate ||phi^-1|| >= rho(y1, y2) / (2 rho(G(y1), G(y2))) for composition
    maps between two-point quotients.
    """
    if X.n != 2 or Y.n != 2:
        raise CardinalityMismatch("two_point_mult_lower needs two-point sets")
    rx = pseudohyperbolic(X[0], X[1])
    ry = pseudohyperbolic(Y[0], Y[1])
    return max(1.0, ry / (2.0 * rx), rx / (2.0 * ry))
