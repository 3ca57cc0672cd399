"""Hausdorff and symmetric distances between point sets, and their
automorphism-invariant versions.

The invariant distances are infima over the whole automorphism group and are
only estimated from above: a pool of anchored candidates is screened and the
best few are refined by a Nelder-Mead search over (w, U).
"""

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .alignment import align_configurations
from .ball import (
    BallAutomorphism,
    apply,
    compose,
    elementary_automorphism,
    identity_automorphism,
    pairwise_euclidean,
    pairwise_pseudohyperbolic,
    _ph_from_arrays,
    pseudohyperbolic,
    psi,
    random_automorphism,
)
from .config import OptimizerConfig
from .errors import CardinalityMismatch, DimError
from .linalg_core import bottleneck_assignment, bottleneck_value, haar_unitary, polar_unitary

W_CLAMP = 1.0 - 1e-6
POLISH_RUNS = 2


class BaseMetric(enum.Enum):
    EUCLIDEAN = "euclidean"
    PSEUDOHYPERBOLIC = "pseudohyperbolic"


class Certificate(str, enum.Enum):
    EXACT = "EXACT"
    UPPER_BOUND = "UPPER_BOUND"
    LOWER_BOUND = "LOWER_BOUND"
    BRACKET = "BRACKET"


def _metric(m):
    return m if isinstance(m, BaseMetric) else BaseMetric(m)


def cost_matrix(X, Y, metric=BaseMetric.PSEUDOHYPERBOLIC):
    if X.dim != Y.dim:
        raise DimError(f"X lives in C^{X.dim}, Y in C^{Y.dim}")
    if _metric(metric) is BaseMetric.EUCLIDEAN:
        return pairwise_euclidean(X, Y)
    return pairwise_pseudohyperbolic(X, Y)


def _hausdorff_from_costs(C):
    return float(max(C.min(axis=1).max(), C.min(axis=0).max()))


def hausdorff(X, Y, metric=BaseMetric.PSEUDOHYPERBOLIC):
    """Hausdorff distance; the sets may have different sizes."""
    return _hausdorff_from_costs(cost_matrix(X, Y, metric))


def symmetric(X, Y, metric=BaseMetric.PSEUDOHYPERBOLIC):
    """min over bijections s of max_i rho(x_i, y_s(i)), with an optimal s."""
    if X.n != Y.n:
        raise CardinalityMismatch(f"|X| = {X.n} but |Y| = {Y.n}")
    return bottleneck_assignment(cost_matrix(X, Y, metric))


def min_separation(X, metric=BaseMetric.PSEUDOHYPERBOLIC):
    C = cost_matrix(X, X, metric)
    np.fill_diagonal(C, np.inf)
    return float(C.min())


def two_point_lower_bound(X, Y):
    """|rho(x1, x2) - rho(y1, y2)| / 2, a lower bound for the invariant symmetric distance."""
    if X.n != 2 or Y.n != 2:
        raise CardinalityMismatch("two_point_lower_bound needs two-point sets")
    return abs(pseudohyperbolic(X[0], X[1]) - pseudohyperbolic(Y[0], Y[1])) / 2.0


def invariant_matchings(X, Y):
    """Bijections built only from automorphism-invariant data.

    The first pairs points whose sorted rows of pairwise rho_ph agree best;
    the others send x_1 to each y_j and pair the rest by their distance to
    the anchor.  For generic congruent sets one of them is the congruence.
    """
    if X.n != Y.n:
        raise CardinalityMismatch(f"|X| = {X.n} but |Y| = {Y.n}")
    DX = pairwise_pseudohyperbolic(X, X)
    DY = pairwise_pseudohyperbolic(Y, Y)
    RX, RY = np.sort(DX, axis=1), np.sort(DY, axis=1)
    profile = np.max(np.abs(RX[:, None, :] - RY[None, :, :]), axis=2)
    out = [bottleneck_assignment(profile)[1]]
    big = 2.0 + profile.max()
    for j in range(Y.n):
        C = np.abs(DX[0][:, None] - DY[j][None, :])
        C[0, :] = big
        C[:, j] = big
        C[0, j] = 0.0
        sigma = bottleneck_assignment(C)[1]
        if sigma not in out:
            out.append(sigma)
    return out


@dataclass
class InvariantDistanceReport:
    value: float
    certificate: Certificate
    witness: BallAutomorphism
    witness_permutation: list = None
    kind: str = ""
    evaluations: int = 0

    def as_dict(self):
        return {
            "kind": self.kind,
            "value": self.value,
            "certificate": self.certificate.value,
            "witness": self.witness.as_dict(),
            "witness_permutation": self.witness_permutation,
        }


# --- candidate pool --------------------------------------------------------


def unitary_grid(d, seed):
    """16 phases when d == 1; otherwise the identity plus 32 seeded Haar unitaries."""
    if d == 1:
        return [np.array([[np.exp(2j * np.pi * k / 16)]]) for k in range(16)]
    rng = np.random.default_rng([seed, 7])
    return [np.eye(d, dtype=complex)] + [haar_unitary(d, rng) for _ in range(32)]


def candidate_pool(X, Y, cfg):
    """Deterministic list of automorphisms to try on Y.

    Contains the identity, psi_{x_i} o U_k o psi_{y_j} for every anchor pair
    and grid unitary, the Procrustes-aligned anchored maps (equal sizes only),
    and ``cfg.random_restarts`` random automorphisms.
    """
    d = X.dim
    pool = [identity_automorphism(d)]
    grid = unitary_grid(d, cfg.seed)
    for i in range(X.n):
        left = elementary_automorphism(X[i])
        for j in range(Y.n):
            for U in grid:
                pool.append(compose(left, BallAutomorphism(Y[j], U)))
    if X.n == Y.n:
        for i in range(X.n):
            for j in range(Y.n):
                pool.append(align_configurations(X, Y, anchors=(i, j), match=True))
    rng = np.random.default_rng([cfg.seed, 11])
    pool.extend(random_automorphism(d, rng) for _ in range(cfg.random_restarts))
    return pool


class _Tracker:
    """Evaluates both set distances at each visited automorphism and keeps the
    best of each.  Automorphisms are handled as raw (w, U) arrays here."""

    def __init__(self, X, Y):
        self.X, self.Y = X.points, Y.points
        self.equal = X.n == Y.n
        self.best = {"hausdorff": (np.inf, None), "symmetric": (np.inf, None)}
        self.count = 0

    def costs(self, w, U):
        return _ph_from_arrays(self.X, psi(w, self.Y) @ U.T)

    def evaluate(self, w, U):
        C = self.costs(w, U)
        self.count += 1
        h = _hausdorff_from_costs(C)
        s = bottleneck_value(C) if self.equal else np.inf
        for key, val in (("hausdorff", h), ("symmetric", s)):
            if val < self.best[key][0]:
                self.best[key] = (val, (w, U))
        return h, s


def _hermitian_exp(theta, d):
    """exp(iH) for the Hermitian H packed in ``theta`` (d^2 reals)."""
    if d == 1:
        return np.array([[np.exp(1j * theta[0])]])
    iu = _TRIU[d]
    k = len(iu[0])
    H = np.diag(theta[:d].astype(complex))
    H[iu] = theta[d : d + k] + 1j * theta[d + k : d + 2 * k]
    H = H + np.triu(H, 1).conj().T
    lam, V = np.linalg.eigh(H)
    return (V * np.exp(1j * lam)) @ V.conj().T


_TRIU = {d: np.triu_indices(d, 1) for d in range(1, 17)}


class _Chart:
    """Local coordinates around (w0, U0): w = w0 + dw, U = U0 exp(iH)."""

    def __init__(self, w0, U0):
        self.w0, self.U0 = w0, U0
        self.d = len(w0)
        self.size = 2 * self.d + self.d * self.d

    def __call__(self, p):
        d = self.d
        w = self.w0 + p[:d] + 1j * p[d : 2 * d]
        nw = np.linalg.norm(w)
        if nw > W_CLAMP:
            w = w * (W_CLAMP / nw)
        return w, self.U0 @ _hermitian_exp(p[2 * d :], d)


def _active_pairs(C, key):
    """Pairs whose costs bound the objective from above near the current point."""
    if key == "symmetric":
        _, perm = bottleneck_assignment(C)
        return list(enumerate(perm))
    rows = [(i, int(np.argmin(C[i]))) for i in range(C.shape[0])]
    cols = [(int(np.argmin(C[:, j])), j) for j in range(C.shape[1])]
    return sorted(set(rows + cols))


def _polish(tracker, chart, x0, key, cfg):
    """Epigraph refinement: minimise t subject to rho(pair) <= t over the active
    pairs (fixed assignment), re-deriving the pairs after each round."""
    idx = 0 if key == "hausdorff" else 1
    x = np.asarray(x0, dtype=float)
    for _ in range(3):
        C = tracker.costs(*chart(x))
        pairs = _active_pairs(C, key)
        rows = np.array([i for i, _ in pairs])
        cols = np.array([j for _, j in pairs])

        def pair_costs(p):
            return tracker.costs(*chart(p[:-1]))[rows, cols]

        z0 = np.append(x, C[rows, cols].max())
        res = minimize(
            lambda z: z[-1],
            z0,
            jac=lambda z: np.eye(len(z))[-1],
            method="SLSQP",
            constraints=[{"type": "ineq", "fun": lambda z: z[-1] - pair_costs(z)}],
            options={"maxiter": 60, "ftol": 1e-14},
        )
        before = tracker.best[key][0]
        val = tracker.evaluate(*chart(res.x[:-1]))[idx]
        if val < tracker.evaluate(*chart(x))[idx]:
            x = res.x[:-1]
        if before - tracker.best[key][0] <= cfg.tolerance:
            break
    return x


def _local_search(tracker, w0, U0, key, cfg):
    """Nelder-Mead in a local chart around (w0, U0); returns (chart, x, value)."""
    chart = _Chart(w0, U0)
    idx = 0 if key == "hausdorff" else 1

    def objective(p):
        return tracker.evaluate(*chart(p))[idx]

    x0 = np.zeros(chart.size)
    step = min(0.1, max(objective(x0), 1e-4))
    simplex = np.vstack([x0, x0 + step * np.eye(chart.size)])
    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={
            "maxiter": cfg.local_search_iters,
            "initial_simplex": simplex,
            "xatol": 1e-12,
            "fatol": cfg.tolerance * 1e-2,
            "adaptive": chart.size > 4,
        },
    )
    return chart, res.x, float(res.fun)


def _refine(tracker, cands, scores, key, cfg):
    idx = 0 if key == "hausdorff" else 1
    order = sorted(range(len(scores)), key=lambda k: (scores[k][idx], k))
    runs = []
    for k in order[: cfg.refine_top]:
        runs.append(_local_search(tracker, cands[k].w, cands[k].U, key, cfg))
        if tracker.best[key][0] <= cfg.tolerance:
            return
    runs.sort(key=lambda r: r[2])
    for chart, x, _ in runs[:POLISH_RUNS]:
        _polish(tracker, chart, x, key, cfg)
        if tracker.best[key][0] <= cfg.tolerance:
            return


def invariant_distances(X, Y, cfg=None, which=("hausdorff", "symmetric")):
    """Upper estimates of the invariant Hausdorff and symmetric distances.

    Both objectives are evaluated at every automorphism the search visits, so
    the Hausdorff estimate never exceeds the symmetric one.
    """
    cfg = cfg or OptimizerConfig()
    if X.dim != Y.dim:
        raise DimError(f"X lives in C^{X.dim}, Y in C^{Y.dim}")
    if "symmetric" in which and X.n != Y.n:
        raise CardinalityMismatch(f"|X| = {X.n} but |Y| = {Y.n}")
    tracker = _Tracker(X, Y)
    cands = candidate_pool(X, Y, cfg)
    scores = [tracker.evaluate(phi.w, phi.U) for phi in cands]
    for key in which:
        if tracker.best[key][0] <= cfg.tolerance:
            continue
        _refine(tracker, cands, scores, key, cfg)
    reports = {}
    for key in which:
        _, (w, U) = tracker.best[key]
        phi = BallAutomorphism(w, polar_unitary(U))
        C = pairwise_pseudohyperbolic(X.points, apply(phi, Y.points))
        perm = None
        if key == "symmetric":
            value, perm = bottleneck_assignment(C)
        else:
            value = _hausdorff_from_costs(C)
        reports[key] = InvariantDistanceReport(
            value=float(value),
            certificate=Certificate.UPPER_BOUND,
            witness=phi,
            witness_permutation=perm,
            kind=key,
            evaluations=tracker.count,
        )
    return reports


def invariant_hausdorff(X, Y, cfg=None):
    return invariant_distances(X, Y, cfg, which=("hausdorff",))["hausdorff"]


def invariant_symmetric(X, Y, cfg=None):
    return invariant_distances(X, Y, cfg, which=("symmetric",))["symmetric"]
