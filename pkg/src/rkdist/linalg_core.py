"""Dense kernels for small complex matrices.

All tolerance policy for eigenvalues, pencils and PSD tests lives here.
Matrices are plain numpy arrays; ``as_hermitian`` validates and symmetrizes.
"""

import numpy as np

from .errors import InvalidMatrix, SingularPencil

HERMITIAN_ATOL = 1e-12
PENCIL_RCOND = 1e-12


def _finite(M):
    M = np.asarray(M, dtype=complex)
    if not np.all(np.isfinite(M)):
        raise InvalidMatrix("matrix has non-finite entries")
    return M


def as_hermitian(M):
    """Validate ``M`` as Hermitian and return its symmetrized copy.

    The asymmetry allowed is 1e-12, relative to the largest entry when that
    exceeds one (kernel matrices near the sphere have entries of order 1e12).
    """
    M = _finite(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InvalidMatrix(f"expected a non-empty square matrix, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M - M.conj().T)) > HERMITIAN_ATOL * scale:
        raise InvalidMatrix("matrix is not Hermitian")
    return 0.5 * (M + M.conj().T)


def hermitian_eigenvalues(M):
    """Ascending eigenvalues of a Hermitian matrix."""
    return np.linalg.eigvalsh(as_hermitian(M))


def hermitian_eigh(M):
    return np.linalg.eigh(as_hermitian(M))


def congruence_factor(Q):
    """Matrix M with M Q M^* = I for a positive definite Hermitian ``Q``.

    Q is first scaled by the diagonal congruence that puts ones on its
    diagonal; this removes the artificial ill-conditioning of kernel matrices
    whose diagonal spans many orders of magnitude.  Raises SingularPencil when
    the scaled matrix has condition number above 1e12.
    """
    Q = as_hermitian(Q)
    diag = Q.diagonal().real
    if np.any(diag <= 0):
        raise SingularPencil("Q has a non-positive diagonal entry")
    s = 1.0 / np.sqrt(diag)
    Qs = Q * np.outer(s, s)
    q_eigs = np.linalg.eigvalsh(Qs)
    if q_eigs[0] <= PENCIL_RCOND * q_eigs[-1]:
        raise SingularPencil(
            f"Q is numerically singular (condition number {q_eigs[-1] / max(q_eigs[0], 1e-300):.3g})"
        )
    L = np.linalg.cholesky(Qs)
    return np.linalg.solve(L, np.diag(s))


def pencil_eigenvalues(P, Q):
    """All generalized eigenvalues of ``P a = t Q a`` for PD ``Q``, ascending."""
    P = as_hermitian(P)
    if P.shape != np.shape(Q):
        raise InvalidMatrix("pencil matrices differ in shape")
    M = congruence_factor(Q)
    S = M @ P @ M.conj().T
    return np.linalg.eigvalsh(0.5 * (S + S.conj().T))


def pencil_extremes(P, Q):
    """Extreme values of the generalized Rayleigh quotient a*Pa / a*Qa."""
    ev = pencil_eigenvalues(P, Q)
    return float(ev[0]), float(ev[-1])


def singular_values(M):
    """Singular values of a (possibly rectangular) matrix, descending."""
    M = _finite(M)
    if M.ndim != 2:
        raise InvalidMatrix("expected a 2-d array")
    if M.size == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def frobenius_norm(M):
    return float(np.linalg.norm(np.asarray(M), "fro"))


def is_psd(M, tol=0.0):
    """True iff lambda_min(M) >= -tol * max(1, lambda_max(M))."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    ev = hermitian_eigenvalues(M)
    return bool(ev[0] >= -tol * max(1.0, ev[-1]))


def polar_unitary(M):
    """Unitary polar factor of a square matrix (nearest unitary in Frobenius norm)."""
    U, _, Vh = np.linalg.svd(np.asarray(M, dtype=complex))
    return U @ Vh


def haar_unitary(d, rng):
    """Haar-distributed d x d unitary drawn from ``rng``."""
    Z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    ph = np.diagonal(R) / np.abs(np.diagonal(R))
    return Q * ph


# --- bottleneck assignment -------------------------------------------------


def _augment(u, adj, match_right, seen):
    for v in adj[u]:
        if not seen[v]:
            seen[v] = True
            if match_right[v] < 0 or _augment(match_right[v], adj, match_right, seen):
                match_right[v] = u
                return True
    return False


def _has_perfect_matching(allowed, rows=None, cols=None):
    """Kuhn's augmenting-path test on the boolean matrix ``allowed``."""
    n = allowed.shape[0]
    rows = range(n) if rows is None else rows
    cols = list(range(n)) if cols is None else cols
    col_index = {c: k for k, c in enumerate(cols)}
    adj = {u: [col_index[c] for c in cols if allowed[u, c]] for u in rows}
    match_right = [-1] * len(cols)
    for u in rows:
        if not adj[u]:
            return False
        if not _augment(u, adj, match_right, [False] * len(cols)):
            return False
    return True


def _check_cost(C):
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] == 0:
        raise InvalidMatrix(f"cost matrix must be square and non-empty, got {C.shape}")
    if not np.all(np.isfinite(C)) or np.any(C < 0):
        raise InvalidMatrix("cost entries must be finite and nonnegative")
    return C


def bottleneck_value(C):
    """min over permutations s of max_i C[i, s(i)] (value only)."""
    C = _check_cost(C)
    n = C.shape[0]
    # the optimum is at least the largest row/column minimum
    lower = max(C.min(axis=1).max(), C.min(axis=0).max())
    levels = np.unique(C)
    levels = levels[levels >= lower]
    lo, hi = 0, len(levels) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _has_perfect_matching(C <= levels[mid]):
            hi = mid
        else:
            lo = mid + 1
    if n == 1:
        return float(C[0, 0])
    return float(levels[lo])


def bottleneck_assignment(C):
    """Exact bottleneck assignment.

    Returns ``(value, perm)`` where ``value = min_s max_i C[i, s(i)]`` and
    ``perm`` is the lexicographically smallest permutation attaining it.
    """
    C = _check_cost(C)
    n = C.shape[0]
    value = bottleneck_value(C)
    allowed = C <= value
    perm = []
    free_cols = list(range(n))
    for i in range(n):
        for j in free_cols:
            if not allowed[i, j]:
                continue
            rest_cols = [c for c in free_cols if c != j]
            if i == n - 1 or _has_perfect_matching(allowed, range(i + 1, n), rest_cols):
                perm.append(j)
                free_cols = rest_cols
                break
    return value, perm
