"""Invariant Riemannian geometry of a symmetric cone.

The distance used throughout is the symmetric-space geodesic distance

    d(x, y) = || log spec P(x^{-1/2}) y ||_2 ,

which is invariant under every linear automorphism of the cone.  Group
elements are represented by their matrix acting on coordinate vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jordan import ConeDescriptor, ConePoint

__all__ = [
    "GroupElement",
    "transporter",
    "distance",
    "pairwise_distance",
    "ball_contains",
    "invariant_measure_density",
    "rotation",
    "boost",
    "dilation",
    "congruence",
    "random_group_element",
    "sample_ball",
    "operator_norm",
    "minor_ratio_bound",
    "pairing_ratio_bound",
    "ball_volume_mc",
]


@dataclass(frozen=True)
class GroupElement:
    """Linear automorphism of the cone given by its coordinate matrix."""

    matrix: np.ndarray
    cone: ConeDescriptor

    def apply(self, x):
        """Apply to coordinates ``(..., n)``."""
        return np.asarray(x) @ self.matrix.T

    def __call__(self, x):
        if isinstance(x, ConePoint):
            return ConePoint(self.apply(x.coords), self.cone)
        return self.apply(x)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.matrix @ other.matrix, self.cone)

    def inverse(self) -> "GroupElement":
        return GroupElement(np.linalg.inv(self.matrix), self.cone)

    def adjoint(self) -> "GroupElement":
        # coordinates are orthonormal up to a constant, so the trace-form
        # adjoint is the transpose
        return GroupElement(self.matrix.T.copy(), self.cone)

    @property
    def determinant_factor(self) -> float:
        """``Delta(g e)``."""
        return float(self.cone.det(self.apply(self.cone.identity)))

    @property
    def linear_det(self) -> float:
        return float(np.linalg.det(self.matrix))


def transporter(cone: ConeDescriptor, xi) -> GroupElement:
    """Self-adjoint ``g = P(xi^{1/2})`` with ``g e = xi``."""
    xi = np.asarray(xi, dtype=float)
    half = cone.power(xi, 0.5)
    return GroupElement(cone.quad_matrix(half), cone)


def _rank2_log_spectrum(cone, x, y):
    # eigenvalues of P(x^{-1/2}) y: sum = (x^{-1}|y), product = Delta(y)/Delta(x);
    # in rank two x^{-1} = (tr(x) e - x) / Delta(x)
    # half the eigenvalue gap is sqrt(-Delta(y - (t/2) x) / Delta(x)); this form
    # keeps full accuracy when x and y nearly coincide
    dx = cone.det(x)
    t = (cone.trace(x) * cone.trace(y) - cone.inner(x, y)) / dx
    p = cone.det(y) / dx
    z = y - 0.5 * t[..., None] * x
    disc = np.sqrt(np.maximum(-cone.det(z) / dx, 0.0))
    big = 0.5 * t + disc
    return np.stack([np.log(p / big), np.log(big)], axis=-1)


def _log_spectrum(cone, x, y):
    if cone.rank == 2:
        return _rank2_log_spectrum(cone, x, y)
    if cone.rank == 1:
        return np.log(y / x)
    a = cone.power(x, -0.5, check=False)
    lam, _ = cone.spectral(cone.quad(a, y))
    return np.log(lam)


def distance(cone: ConeDescriptor, x, y):
    """Invariant distance between interior points (broadcasts)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    cone.check_interior(x)
    cone.check_interior(y)
    return np.sqrt(np.sum(_log_spectrum(cone, x, y) ** 2, axis=-1))


def pairwise_distance(cone: ConeDescriptor, X, Y):
    """Matrix of distances ``d(X[i], Y[j])``."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return distance(cone, X[:, None, :], Y[None, :, :])


def ball_contains(cone: ConeDescriptor, center, radius: float, xi) -> np.ndarray:
    """``d(center, xi) < radius``; points off the open cone give False."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    cone.check_interior(center)
    xi = np.asarray(xi, dtype=float)
    inside = cone.is_interior(xi)
    safe = np.where(inside[..., None], xi, cone.identity)
    d = np.sqrt(np.sum(_log_spectrum(cone, np.asarray(center, float), safe) ** 2, axis=-1))
    return inside & (d < radius)


def invariant_measure_density(cone: ConeDescriptor, xi):
    """``Delta(xi)^{-n/r}``."""
    cone.check_interior(xi)
    return cone.det(xi) ** (-cone.n_over_r)


# ---------------------------------------------------------------------------
# group elements
# ---------------------------------------------------------------------------

def congruence(cone: ConeDescriptor, A) -> GroupElement:
    """``X -> A X A^T`` on Sym coordinates."""
    A = np.asarray(A, dtype=float)
    basis = cone.to_matrix(np.eye(cone.dim))
    return GroupElement(cone.from_matrix(A @ basis @ A.T).T, cone)


def rotation(cone: ConeDescriptor, rng) -> GroupElement:
    """Random automorphism fixing ``e``."""
    k = cone.dim - 1 if cone.kind == "lightcone" else cone.size
    Q, R = np.linalg.qr(rng.standard_normal((k, k)))
    Q = Q * np.sign(np.diag(R))
    if cone.kind == "lightcone":
        M = np.eye(cone.dim)
        M[1:, 1:] = Q
        return GroupElement(M, cone)
    return congruence(cone, Q)


def boost(cone: ConeDescriptor, rapidity: float, axis: int = 1) -> GroupElement:
    """Hyperbolic rotation in the ``(x_1, x_axis)`` plane of the light cone."""
    if cone.kind != "lightcone":
        raise TypeError("boosts are defined for the light cone")
    if not 1 <= axis < cone.dim:
        raise ValueError("axis out of range")
    M = np.eye(cone.dim)
    ch, sh = np.cosh(rapidity), np.sinh(rapidity)
    M[0, 0] = M[axis, axis] = ch
    M[0, axis] = M[axis, 0] = sh
    return GroupElement(M, cone)


def dilation(cone: ConeDescriptor, t: float) -> GroupElement:
    return GroupElement(t * np.eye(cone.dim), cone)


def random_group_element(cone: ConeDescriptor, rng, spread: float = 1.0) -> GroupElement:
    """Composition of a quadratic representation, a rotation and a boost."""
    a = cone.random_interior(rng, spread=0.5 * spread)
    g = GroupElement(cone.quad_matrix(a), cone) @ rotation(cone, rng)
    if cone.kind == "lightcone":
        axis = int(rng.integers(1, cone.dim))
        g = boost(cone, spread * rng.standard_normal(), axis) @ g
    else:
        A = np.eye(cone.size) + 0.5 * spread * rng.standard_normal((cone.size, cone.size))
        g = congruence(cone, A) @ g
    return g


def sample_ball(cone: ConeDescriptor, center, radius: float, rng, size: int):
    """Points of ``B_radius(center)``, drawn as ``g exp(u)`` with ``|u| < radius``.

    The draw is uniform in the tangent ball at ``e``, not in the invariant
    measure.
    """
    u = rng.standard_normal((size, cone.dim))
    u /= cone.norm(u)[:, None]
    u *= radius * rng.uniform(size=(size, 1)) ** (1.0 / cone.dim)
    z = cone.spectral_map(u, np.exp)
    return transporter(cone, center).apply(z)


def operator_norm(g: GroupElement, iters: int = 200, seed: int = 0) -> float:
    """Trace-norm operator norm of ``g`` by power iteration on ``g^T g``."""
    M = g.matrix
    v = np.random.default_rng(seed).standard_normal(M.shape[0])
    lam = 0.0
    for _ in range(iters):
        w = M.T @ (M @ v)
        lam = np.linalg.norm(w)
        v = w / lam
    return float(np.sqrt(lam))


# ---------------------------------------------------------------------------
# empirical constants
# ---------------------------------------------------------------------------

def minor_ratio_bound(cone: ConeDescriptor, delta: float, rng, samples: int = 2000) -> float:
    """Sampled ``sup Delta_k(xi)/Delta_k(xi')`` over pairs with ``d <= delta``."""
    xi = cone.random_interior(rng, samples, spread=1.5)
    z = sample_ball(cone, cone.identity, delta, rng, samples)
    other = np.stack([transporter(cone, x).apply(w) for x, w in zip(xi, z)])
    ratio = cone.minors(xi) / cone.minors(other)
    return float(np.max(np.maximum(ratio, 1.0 / ratio)))


def pairing_ratio_bound(cone: ConeDescriptor, delta: float, rng, samples: int = 2000) -> float:
    """Sampled ``sup (xi|y)/(xi'|y)`` over ``d(xi, xi') <= delta`` and
    ``y`` in the closed cone (in rank at least two, half of the ``y`` draws
    are boundary points)."""
    xi = cone.random_interior(rng, samples, spread=1.5)
    z = sample_ball(cone, cone.identity, delta, rng, samples)
    other = np.stack([transporter(cone, x).apply(w) for x, w in zip(xi, z)])
    y = cone.random_interior(rng, samples, spread=1.5)
    lam, frame = cone.spectral(y)
    if cone.rank > 1:
        lam[: samples // 2, 0] = 0.0  # rank-deficient points of the boundary
    y = cone.from_spectral(lam, frame)
    ratio = cone.inner(xi, y) / cone.inner(other, y)
    return float(np.max(np.maximum(ratio, 1.0 / ratio)))


def ball_volume_mc(cone: ConeDescriptor, center, radius: float,
                   samples: int = 100_000, seed: int = 42):
    """Monte-Carlo invariant measure of ``B_radius(center)``.

    Uniform draws in a coordinate box around the ball, weighted by the
    invariant density and normalised to the trace-form Lebesgue measure.

    Returns
    -------
    volume, standard_error : float
    """
    rng = np.random.default_rng(seed)
    center = np.asarray(center, dtype=float)
    g = transporter(cone, center)
    # B_radius(e) sits in the trace-norm ball |z - e| <= sqrt(r)(e^radius - 1);
    # sample its coordinate bounding cube and push forward by g (a linear
    # change of variables, so the box volume picks up |det g|)
    half = np.sqrt(cone.rank) * np.expm1(radius)
    if cone.kind == "lightcone":
        half /= np.sqrt(2.0)
    cube = cone.identity + rng.uniform(-half, half, size=(samples, cone.dim))
    pts = g.apply(cube)
    inside = ball_contains(cone, center, radius, pts)
    w = np.zeros(samples)
    w[inside] = cone.det(pts[inside]) ** (-cone.n_over_r)
    box = (2 * half) ** cone.dim * abs(g.linear_det) * _lebesgue_factor(cone)
    return float(box * w.mean()), float(box * w.std(ddof=1) / np.sqrt(samples))


def _lebesgue_factor(cone: ConeDescriptor) -> float:
    """Trace-form Lebesgue measure per unit coordinate volume."""
    return 2.0 ** (cone.dim / 2) if cone.kind == "lightcone" else 1.0
