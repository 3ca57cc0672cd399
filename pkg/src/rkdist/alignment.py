"""Unitary Procrustes alignment of point configurations."""

import numpy as np

from .ball import BallAutomorphism, PointSet, compose, elementary_automorphism, psi
from .errors import CardinalityMismatch, DimError, PreconditionError, ValidationError
from .linalg_core import bottleneck_assignment, singular_values


def configuration_matrix(X):
    """d x n matrix whose columns are the points of X."""
    if isinstance(X, PointSet):
        return X.points.T.copy()
    A = np.asarray(X, dtype=complex)
    if A.ndim != 2:
        raise ValidationError("configuration must be a d x n matrix")
    if np.any(np.linalg.norm(A, axis=0) >= 1.0):
        raise ValidationError("configuration columns must lie in the open unit ball")
    return A


def _check_pair(A, B):
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape:
        raise DimError(f"configurations differ in shape: {A.shape} vs {B.shape}")
    return A, B


def procrustes(A, B):
    """Unitary W minimising ||A - W B||_F, and the attained residual.

    W is the unitary factor of the SVD of A B^*; when A B^* is rank deficient
    the completion is whatever the SVD returns (deterministic for given input).
    """
    A, B = _check_pair(A, B)
    U, _, Vh = np.linalg.svd(A @ B.conj().T)
    W = U @ Vh
    return W, float(np.linalg.norm(A - W @ B))


def singular_value_residual(A, B):
    """sum_i sigma_i(A)^2 + sigma_i(B)^2 - 2 sigma_i(A B^*), i = 1..d."""
    A, B = _check_pair(A, B)
    d = A.shape[0]

    def padded(M):
        s = singular_values(M)
        return np.pad(s, (0, max(0, d - len(s))))[:d]

    sa, sb, sab = padded(A), padded(B), padded(A @ B.conj().T)
    return float(np.sum(sa**2 + sb**2 - 2.0 * sab))


def procrustes_bound(A, eps):
    """d (2 ||A||_F eps^(1/2) + eps)."""
    A = np.asarray(A)
    return A.shape[0] * (2.0 * np.linalg.norm(A) * np.sqrt(eps) + eps)


def procrustes_bound_check(A, B, eps):
    """Check the Procrustes residual bound under ||A*A - B*B||_F < eps.

    A ``False`` return means the bound failed, which can only happen through a
    numerical fault.
    """
    A, B = _check_pair(A, B)
    gap = np.linalg.norm(A.conj().T @ A - B.conj().T @ B)
    if not gap < eps:
        raise PreconditionError(f"||A*A - B*B||_F = {gap:.3g} is not below eps = {eps:.3g}")
    _, res = procrustes(A, B)
    return bool(res**2 <= procrustes_bound(A, eps))


def match_by_norm(A, B):
    """Column permutation of B pairing columns of similar Euclidean norm."""
    na = np.linalg.norm(A, axis=0)
    nb = np.linalg.norm(B, axis=0)
    _, perm = bottleneck_assignment(np.abs(na[:, None] - nb[None, :]))
    return perm


def align_configurations(X, Y, anchors=(0, 0), match=False):
    """Automorphism moving Y onto X.

    Both sets are recentred so that ``X[anchors[0]]`` and ``Y[anchors[1]]``
    sit at the origin; the recentred configurations are aligned by the
    Procrustes unitary W, and the result is psi_x o W o psi_y.  With
    ``match=True`` the columns are paired by their distance to the anchor
    (an automorphism invariant) instead of by index.
    """
    if X.n != Y.n:
        raise CardinalityMismatch(f"|X| = {X.n} but |Y| = {Y.n}")
    if X.dim != Y.dim:
        raise DimError(f"X lives in C^{X.dim}, Y in C^{Y.dim}")
    i, j = anchors
    A = psi(X[i], X.points).T
    B = psi(Y[j], Y.points).T
    if match:
        B = B[:, match_by_norm(A, B)]
    W, _ = procrustes(A, B)
    inner_ = BallAutomorphism(Y[j], W)  # W o psi_y
    return compose(elementary_automorphism(X[i]), inner_)
