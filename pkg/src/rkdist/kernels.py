"""Drury-Arveson (Szego) kernel matrices on finite point sets and the
truncation orders of their Schur-power series."""

import numpy as np

from .ball import PointSet
from .errors import NoConvergence, RangeError, ScaleError
from .linalg_core import as_hermitian, hermitian_eigenvalues, is_psd

MAX_ORDER = 10_000
STABLE_RTOL = 1e-10
SELF_TOL = 1e-12
DOMINATION_TOL = 1e-10


def _points(X):
    return X.points if isinstance(X, PointSet) else np.atleast_2d(np.asarray(X, dtype=complex))


def inner_product_matrix(X):
    """[<x_i, x_j>]."""
    P = _points(X)
    return as_hermitian(P @ P.conj().T)


def gram(X):
    """[1 / (1 - <x_i, x_j>)]."""
    return as_hermitian(1.0 / (1.0 - inner_product_matrix(X)))


def schur_power_sum(A, N):
    """Entrywise sum_{k=0}^{N} A_ij^k."""
    if N < 0:
        raise RangeError("N must be nonnegative")
    A = np.asarray(A, dtype=complex)
    S = np.ones_like(A)
    term = np.ones_like(A)
    for _ in range(N):
        term = term * A
        S = S + term
    return as_hermitian(S)


def _partial_sums(A):
    """Yield (N, sum_{k<=N} A^{ok}) for N = 0, 1, ..."""
    S = np.ones_like(A)
    term = np.ones_like(A)
    N = 0
    while True:
        yield N, 0.5 * (S + S.conj().T)
        term = term * A
        S = S + term
        N += 1


def stabilization_index(A):
    """First M with lambda_min(sum_{k<=M} A^{ok}) > 1e-10 lambda_max."""
    for M, S in _partial_sums(np.asarray(A, dtype=complex)):
        ev = hermitian_eigenvalues(S)
        if ev[0] > STABLE_RTOL * ev[-1]:
            return M
        if M >= MAX_ORDER:
            raise NoConvergence("partial Schur sums never became positive definite")


def tail_bound(n, r, N):
    """n r^(2(N+1)) / (1 - r^2), the operator bound on sum_{k>N} B^{ok} for points in r B_d."""
    return n * r ** (2 * (N + 1)) / (1.0 - r * r)


def tail_condition(A, r, eps, N):
    """eps sum_{k<=N} A^{ok} >= tail_bound(n, r, N) I, checked with is_psd."""
    n = A.shape[0]
    return is_psd(eps * schur_power_sum(A, N) - tail_bound(n, r, N) * np.eye(n), 0.0)


def truncation_order_tail(V, r, eps):
    """Smallest N >= M0 with eps sum_{k<=N} A^{ok} >= n r^(2(N+1))/(1-r^2) I.

    A is the inner-product matrix of V and M0 the index at which the partial
    sums become positive definite.  Such an N makes
    eps [sum_{k<=N} <v_i,v_j>^k] dominate [sum_{k>N} <u_i,u_j>^k] for every
    n-tuple u in the closed ball of radius r.
    """
    if not 0.0 < r < 1.0:
        raise RangeError(f"r must lie in (0, 1), got {r}")
    if eps <= 0:
        raise RangeError(f"eps must be positive, got {eps}")
    A = inner_product_matrix(V)
    n = A.shape[0]
    M0 = stabilization_index(A)
    gen = _partial_sums(A)
    for N, S in gen:
        if N < M0:
            continue
        if is_psd(eps * S - tail_bound(n, r, N) * np.eye(n), 0.0):
            return N
        if N >= MAX_ORDER:
            raise NoConvergence(f"no truncation order below {MAX_ORDER} (r={r}, eps={eps})")


def self_condition(V, eps, N):
    """[sum_{k<=N} <v_i,v_j>^k] >= gram(V) / (1 + eps), at PSD tolerance 1e-12."""
    A = inner_product_matrix(V)
    return is_psd(schur_power_sum(A, N) - gram(V) / (1.0 + eps), SELF_TOL)


def truncation_order_self(V, eps):
    """Smallest N with [sum_{k<=N} <v_i,v_j>^k] >= gram(V)/(1+eps).

    Starts from the order given by the tail criterion with u = v and
    r = max |v_i|, then steps down while the direct inequality still holds
    (and up, should rounding make the start fail it).
    """
    if eps <= 0:
        raise RangeError(f"eps must be positive, got {eps}")
    r = float(np.max(np.linalg.norm(_points(V), axis=1)))
    N = 0 if r == 0.0 else truncation_order_tail(V, r, eps)
    while not self_condition(V, eps, N):
        N += 1
        if N > MAX_ORDER:
            raise NoConvergence("direct truncation inequality never held")
    while N > 0 and self_condition(V, eps, N - 1):
        N -= 1
    return N


def kernel_domination(X2, mapped, C):
    """Whether [1/(1-<x_i,x_j>)] - [1/(1 - C^-2 <g_i,g_j>)] is PSD (tol 1e-10)."""
    P = _points(X2)
    G = _points(mapped)
    if P.shape[0] != G.shape[0]:
        raise RangeError("X2 and mapped must have the same number of points")
    if C <= 0 or np.any(np.linalg.norm(G, axis=1) >= C):
        raise ScaleError(f"mapped points must lie strictly inside the ball of radius C={C}")
    K2 = gram(P)
    KG = as_hermitian(1.0 / (1.0 - (G @ G.conj().T) / (C * C)))
    return is_psd(K2 - KG, DOMINATION_TOL)
