"""Linear fixed-point iterations for quadratics and their spectral diagnostics.

Gradient descent and cyclic coordinate descent on a positive definite
quadratic are affine maps ``x -> T x + b_vec``.  This module materializes
``T`` (by probing with unit vectors, which doubles as a consistency check
against the update kernels), measures spectral radii, builds the
similarity-symmetrized matrix of the double-sweep iteration, and traces
numerical-range boundaries used to judge whether acceleration is safe.

All diagnostics here are dense and deliberately refuse dimensions above
``DENSE_LIMIT``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError
from . import kernels

__all__ = [
    "DENSE_LIMIT",
    "Quadratic",
    "LinearIteration",
    "RateBound",
    "NumericalRange",
    "gd_iteration",
    "cd_iteration",
    "cdsym_iteration",
    "spectral_radius",
    "numerical_range_boundary",
]

DENSE_LIMIT = 2000


@dataclass(frozen=True)
class Quadratic:
    """Objective ``0.5 x'Hx + b'x`` with symmetric positive definite H."""

    H: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        H = np.ascontiguousarray(self.H, dtype=np.float64)
        b = np.ascontiguousarray(self.b, dtype=np.float64)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "b", b)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ArgumentError("H must be square")
        if b.shape != (H.shape[0],):
            raise ArgumentError("b must match the dimension of H")
        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(b))):
            raise ArgumentError("H and b must be finite")
        scale = np.abs(H).max() if H.size else 0.0
        if scale and np.abs(H - H.T).max() > 1e-10 * scale:
            raise ArgumentError("H must be symmetric")
        if H.size and np.diag(H).min() <= 0.0:
            raise ArgumentError("H must have positive diagonal entries")
        H.setflags(write=False)
        b.setflags(write=False)

    @property
    def dim(self):
        return self.H.shape[0]

    def value(self, x):
        return 0.5 * x @ (self.H @ x) + self.b @ x

    def gradient(self, x):
        return self.H @ x + self.b

    def solve(self):
        """The minimizer ``-H^{-1} b``."""
        return np.linalg.solve(self.H, -self.b)


def _check_dense_size(p):
    if p > DENSE_LIMIT:
        raise ArgumentError(
            f"dense diagnostics are limited to dimension {DENSE_LIMIT}, got {p}")


@dataclass(frozen=True)
class LinearIteration:
    """Affine map ``x -> T x + b_vec`` with a kind tag (gd/cd/cdsym)."""

    T: np.ndarray
    b_vec: np.ndarray
    kind: str

    def apply(self, x):
        return self.T @ x + self.b_vec

    def fixed_point(self):
        p = self.T.shape[0]
        return np.linalg.solve(np.eye(p) - self.T, self.b_vec)

    def spectral_radius(self):
        return spectral_radius(self.T)


def gd_iteration(quad, L):
    """Gradient-descent map ``T = I - H/L``, ``b_vec = -b/L``.

    ``L`` must be positive; contraction additionally needs
    ``L >= lambda_max(H)``, which is the caller's responsibility.
    """
    if not (np.isfinite(L) and L > 0):
        raise ArgumentError("step denominator L must be positive")
    _check_dense_size(quad.dim)
    p = quad.dim
    T = np.eye(p) - quad.H / L
    return LinearIteration(T, -quad.b / L, kind="gd")


def _probe_affine(epoch, p):
    # Columns of T via epoch(e_j) - epoch(0); epoch(0) is the offset.
    b_vec = epoch(np.zeros(p))
    T = np.empty((p, p))
    for j in range(p):
        e = np.zeros(p)
        e[j] = 1.0
        T[:, j] = epoch(e) - b_vec
    return T, b_vec


def cd_iteration(quad):
    """One cyclic coordinate-descent epoch (coordinate 1 first) as an affine map.

    The matrix is built by probing the epoch kernel with unit vectors, so
    it reflects exactly what the solver executes.
    """
    _check_dense_size(quad.dim)
    p = quad.dim
    order = np.arange(p, dtype=np.int64)

    def epoch(x):
        kernels.cd_dense_epoch(quad.H, quad.b, x, order)
        return x

    T, b_vec = _probe_affine(epoch, p)
    return LinearIteration(T, b_vec, kind="cd")


def _sqrt_psd(H):
    w, V = np.linalg.eigh(H)
    if w[-1] <= 0 or w[0] < 1e-12 * w[-1]:
        raise ArgumentError(
            "H must be positive definite (eigenvalue below 1e-12 of the largest)")
    root = np.sqrt(w)
    return (V * root) @ V.T, (V / root) @ V.T


def cdsym_iteration(quad):
    """Double-sweep (forward then backward) coordinate descent.

    Returns the affine map of one double sweep together with the
    symmetric matrix ``S = H^{1/2} T H^{-1/2}``, which shares its
    spectrum with ``T`` and certifies that all eigenvalues are real.
    """
    _check_dense_size(quad.dim)
    p = quad.dim
    fwd = np.arange(p, dtype=np.int64)
    bwd = fwd[::-1].copy()

    def epoch(x):
        kernels.cd_dense_epoch(quad.H, quad.b, x, fwd)
        kernels.cd_dense_epoch(quad.H, quad.b, x, bwd)
        return x

    T, b_vec = _probe_affine(epoch, p)
    H_half, H_half_inv = _sqrt_psd(quad.H)
    S = H_half @ T @ H_half_inv
    S = 0.5 * (S + S.T)
    return LinearIteration(T, b_vec, kind="cdsym"), S


def spectral_radius(T):
    """Largest eigenvalue modulus of a square matrix (dense, exact)."""
    T = np.asarray(T, dtype=np.float64)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ArgumentError("spectral_radius expects a square matrix")
    if not np.all(np.isfinite(T)):
        raise ArgumentError("matrix must be finite")
    _check_dense_size(T.shape[0])
    if T.size == 0:
        return 0.0
    return float(np.abs(np.linalg.eigvals(T)).max())


@dataclass(frozen=True)
class RateBound:
    """Geometric factors bounding extrapolated iterates in the B-norm.

    ``offline_factor(k)`` bounds the error ratio of window-k offline
    extrapolation; ``online_factor(k, K)`` the online variant after k
    steps with window K.  For the double-sweep map the factors carry the
    ``sqrt(kappa_H)`` prefactor; for the symmetric gradient map the
    prefactor is 1.
    """

    rho: float
    zeta: float
    B: np.ndarray
    kappa_H: float
    kind: str

    @classmethod
    def from_iteration(cls, it, H):
        if it.kind not in ("gd", "cdsym"):
            raise ArgumentError(
                f"no extrapolation rate bound for iteration kind {it.kind!r}")
        rho = it.spectral_radius()
        if not rho < 1.0:
            raise ArgumentError("iteration must be a contraction (rho < 1)")
        root = math.sqrt(1.0 - rho)
        zeta = (1.0 - root) / (1.0 + root)
        p = it.T.shape[0]
        E = it.T - np.eye(p)
        B = E.T @ E
        w = np.linalg.eigvalsh(np.asarray(H, dtype=np.float64))
        if w[0] <= 0:
            raise ArgumentError("H must be positive definite")
        return cls(rho=rho, zeta=zeta, B=B, kappa_H=float(w[-1] / w[0]),
                   kind=it.kind)

    @property
    def prefactor(self):
        return math.sqrt(self.kappa_H) if self.kind == "cdsym" else 1.0

    def offline_factor(self, k):
        if k < 1:
            raise ArgumentError("k must be >= 1")
        z = self.zeta ** (k - 1)
        return self.prefactor * 2.0 * z / (1.0 + z * z)

    def online_factor(self, k, K):
        if K < 1 or k < 1:
            raise ArgumentError("k and K must be >= 1")
        return self.offline_factor(K) ** (k / K)

    def b_norm(self, v):
        return math.sqrt(max(float(v @ (self.B @ v)), 0.0))


@dataclass(frozen=True)
class NumericalRange:
    """Sampled boundary of the numerical range of a matrix power.

    ``points[i]`` is ``v* M v`` for the top eigenvector of the Hermitian
    part of ``exp(1j*angles[i]) * M``; ``support[i]`` is the matching
    largest eigenvalue, i.e. the support function of the range in that
    direction.  Membership tests use the support half-planes (an outer
    description, robust even when the range degenerates to a segment).
    """

    q: int
    angles: np.ndarray
    points: np.ndarray
    support: np.ndarray
    contains_one: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "contains_one", self.contains(1.0 + 0.0j))

    def contains(self, z, tol=1e-12):
        z = complex(z)
        lhs = np.real(np.exp(1j * self.angles) * z)
        return bool(np.all(lhs <= self.support + tol))

    def save_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("angle,re,im\n")
            for a, z in zip(self.angles, self.points):
                fh.write(f"{a:.17g},{z.real:.17g},{z.imag:.17g}\n")


def numerical_range_boundary(T, q=1, n_angles=360):
    """Boundary points of the numerical range of ``T^q``.

    For each direction ``theta`` on a uniform grid, the top eigenpair of
    the Hermitian part of ``exp(1j*theta) T^q`` yields one boundary point
    ``v* T^q v`` and the support value in that direction.

    Parameters
    ----------
    T : ndarray
        Square matrix, dimension at most ``DENSE_LIMIT``.
    q : int
        Power applied to ``T`` before sweeping (``>= 1``).
    n_angles : int
        Grid resolution (``>= 3``).
    """
    T = np.asarray(T, dtype=np.float64)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ArgumentError("numerical range expects a square matrix")
    if not np.all(np.isfinite(T)):
        raise ArgumentError("matrix must be finite")
    if q < 1:
        raise ArgumentError("q must be >= 1")
    if n_angles < 3:
        raise ArgumentError("n_angles must be >= 3")
    _check_dense_size(T.shape[0])
    M = np.linalg.matrix_power(T, q)
    angles = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    points = np.empty(n_angles, dtype=np.complex128)
    support = np.empty(n_angles)
    for i, theta in enumerate(angles):
        R = np.exp(1j * theta) * M
        Hh = 0.5 * (R + R.conj().T)
        w, V = np.linalg.eigh(Hh)
        v = V[:, -1]
        support[i] = w[-1]
        points[i] = v.conj() @ (M @ v)
    return NumericalRange(q=q, angles=angles, points=points, support=support)
