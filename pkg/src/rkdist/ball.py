"""Points of the open unit ball of C^d, the pseudohyperbolic metric and
ball automorphisms written as ``z -> U @ psi_w(z)``.

Inner products are linear in the first slot: <z, w> = sum z_i conj(w_i).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimError, ValidationError
from .linalg_core import haar_unitary, polar_unitary

BOUNDARY_MARGIN = 1e-12
DISTINCT_TOL = 1e-12
UNITARY_TOL = 1e-10


def inner(z, w):
    """<z, w>, linear in z."""
    return complex(np.vdot(w, z))


def ball_point(z, d=None):
    """Validate a point of the open ball and return it as a complex vector."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.ndim != 1:
        raise ValidationError(f"a ball point must be a vector, got shape {z.shape}")
    if d is not None and z.shape[0] != d:
        raise DimError(f"expected a point of C^{d}, got C^{z.shape[0]}")
    if not np.all(np.isfinite(z)):
        raise ValidationError("point has non-finite coordinates")
    if np.linalg.norm(z) >= 1.0 - BOUNDARY_MARGIN:
        raise ValidationError(f"point {z} is not inside the open unit ball")
    return z


@dataclass(frozen=True, eq=False)
class PointSet:
    """An ordered list of n distinct points of the open unit ball of C^d.

    ``points`` has shape (n, d).  One-dimensional data may be given as a flat
    list of complex numbers.
    """

    points: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.points, dtype=complex)
        if P.ndim == 1:
            P = P[:, None]
        if P.ndim != 2 or P.shape[0] < 1 or P.shape[1] < 1:
            raise ValidationError(f"point array must be (n, d) with n, d >= 1, got {P.shape}")
        for i, z in enumerate(P):
            try:
                ball_point(z)
            except ValidationError as exc:
                raise ValidationError(str(exc), index=i) from None
        diff = np.linalg.norm(P[:, None, :] - P[None, :, :], axis=2)
        np.fill_diagonal(diff, np.inf)
        if np.min(diff) <= DISTINCT_TOL:
            i, j = np.unravel_index(np.argmin(diff), diff.shape)
            raise ValidationError(f"points {min(i, j)} and {max(i, j)} coincide", index=max(i, j))
        P.setflags(write=False)
        object.__setattr__(self, "points", P)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def permuted(self, perm):
        return PointSet(self.points[list(perm)])

    def max_norm(self):
        return float(np.max(np.linalg.norm(self.points, axis=1)))

    def __repr__(self):
        return f"PointSet(n={self.n}, d={self.dim})"


def _same_dim(a, b):
    if a.shape[-1] != b.shape[-1]:
        raise DimError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")


def _ph_from_arrays(Z, W):
    """Pairwise pseudohyperbolic distances between rows of Z and rows of W.

    Uses |psi_w(z)|^2 = (|z-w|^2 (1-|z|^2) + |<z, z-w>|^2) / |1 - <z,w>|^2,
    which is a sum of nonnegative terms and stays accurate for nearby points.
    """
    D = Z[:, None, :] - W[None, :, :]
    dd = np.sum(np.abs(D) ** 2, axis=2)
    nz = np.linalg.norm(Z, axis=1)[:, None]
    # 1 - |z|^2 and 1 - <z,w> = (1 - |z|^2) + <z, z-w>, free of cancellation near the sphere
    gap = (1.0 - nz) * (1.0 + nz)
    zd = np.einsum("ik,ijk->ij", Z, D.conj())
    num = dd * gap + np.abs(zd) ** 2
    den = np.abs(gap + zd)
    rho = np.sqrt(num) / den
    return np.minimum(rho, np.nextafter(1.0, 0.0))


def pseudohyperbolic(z, w):
    """rho_ph(z, w) = |psi_w(z)|."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    _same_dim(z, w)
    return float(_ph_from_arrays(z[None, :], w[None, :])[0, 0])


def pairwise_pseudohyperbolic(X, Y):
    X = X.points if isinstance(X, PointSet) else np.asarray(X, dtype=complex)
    Y = Y.points if isinstance(Y, PointSet) else np.asarray(Y, dtype=complex)
    _same_dim(X, Y)
    return _ph_from_arrays(X, Y)


def pairwise_euclidean(X, Y):
    X = X.points if isinstance(X, PointSet) else np.asarray(X, dtype=complex)
    Y = Y.points if isinstance(Y, PointSet) else np.asarray(Y, dtype=complex)
    _same_dim(X, Y)
    return np.linalg.norm(X[:, None, :] - Y[None, :, :], axis=2)


def psi(w, Z):
    """Elementary involution psi_w applied to the rows of Z (or to one vector)."""
    w = np.asarray(w, dtype=complex)
    Z = np.asarray(Z, dtype=complex)
    single = Z.ndim == 1
    Z = np.atleast_2d(Z)
    _same_dim(Z, w)
    ww = float(np.real(np.vdot(w, w)))
    if ww == 0.0:
        out = -Z
    else:
        c = Z @ w.conj()
        Pz = np.outer(c / ww, w)
        s = np.sqrt(1.0 - ww)
        out = (w[None, :] - Pz - s * (Z - Pz)) / (1.0 - c)[:, None]
    return out[0] if single else out


@dataclass(frozen=True, eq=False)
class BallAutomorphism:
    """The automorphism z -> U psi_w(z).  Maps w to 0."""

    w: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        w = ball_point(self.w)
        U = np.asarray(self.U, dtype=complex)
        d = w.shape[0]
        if U.shape != (d, d):
            raise DimError(f"U must be {d}x{d}, got {U.shape}")
        if np.linalg.norm(U.conj().T @ U - np.eye(d)) > UNITARY_TOL:
            raise ValidationError("U is not unitary")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "U", U)

    @property
    def dim(self):
        return self.w.shape[0]

    def __call__(self, z):
        return apply(self, z)

    def as_dict(self):
        return {
            "w": [[float(c.real), float(c.imag)] for c in self.w],
            "U": [[[float(c.real), float(c.imag)] for c in row] for row in self.U],
        }


def identity_automorphism(d):
    # psi_0 = -id
    return BallAutomorphism(np.zeros(d, dtype=complex), -np.eye(d, dtype=complex))


def elementary_automorphism(w):
    w = ball_point(w)
    return BallAutomorphism(w, np.eye(w.shape[0], dtype=complex))


def unitary_automorphism(U):
    """The linear automorphism z -> U z."""
    U = np.asarray(U, dtype=complex)
    return BallAutomorphism(np.zeros(U.shape[0], dtype=complex), -U)


def apply(phi, z):
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != phi.dim:
        raise DimError(f"automorphism acts on C^{phi.dim}, point is in C^{z.shape[-1]}")
    out = psi(phi.w, z)
    return out @ phi.U.T if out.ndim == 2 else phi.U @ out


def apply_set(phi, X):
    if X.dim != phi.dim:
        raise DimError(f"automorphism acts on C^{phi.dim}, set lives in C^{X.dim}")
    return PointSet(apply(phi, X.points))


def invert(phi):
    """Inverse automorphism; uses psi_w(U* z) = U* psi_{Uw}(z)."""
    return BallAutomorphism(phi.U @ phi.w, phi.U.conj().T)


def compose(outer, inner_):
    """outer o inner_, rewritten in the (w, U) form."""
    d = outer.dim
    w = apply(invert(inner_), outer.w)
    # outer o inner_ o psi_w fixes the origin, hence is linear
    probe = 0.5 * np.eye(d, dtype=complex)
    cols = apply(outer, apply(inner_, psi(w, probe))) / 0.5
    return BallAutomorphism(w, polar_unitary(cols.T))


def random_ball_point(d, rng, radius=0.9):
    """Point drawn uniformly from the ball of the given radius."""
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    v /= np.linalg.norm(v)
    return v * radius * rng.random() ** (1.0 / (2 * d))


def random_automorphism(d, rng, radius=0.9):
    return BallAutomorphism(random_ball_point(d, rng, radius), haar_unitary(d, rng))


def random_pointset(n, d, rng, radius=0.9, min_sep=1e-3):
    """n random points in the ball of the given radius, pairwise Euclidean-separated."""
    for _ in range(1000):
        P = np.array([random_ball_point(d, rng, radius) for _ in range(n)])
        diff = np.linalg.norm(P[:, None] - P[None], axis=2) + np.eye(n)
        if np.min(diff) > min_sep:
            return PointSet(P)
    raise ValidationError("could not draw a separated point set")
