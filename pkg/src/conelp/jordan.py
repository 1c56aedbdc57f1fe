"""Euclidean Jordan algebra primitives for the light cone and the cone of
positive definite symmetric matrices.

All array routines work on coordinate arrays of shape ``(..., n)`` so they
vectorise over leading axes.  Coordinates are chosen so that the plain dot
product of coordinate vectors is proportional to the trace form:

* light cone ``Lambda_n``: coordinates ``(x_1, x')`` in R^n, trace form
  ``(x|y) = 2 (x_1 y_1 + x' . y')``;
* ``Sym_+(r)``: packed coordinates, diagonal entries first and then the
  upper off-diagonal entries in row-major order, each off-diagonal entry
  multiplied by ``sqrt(2)``.  The packed dot product equals ``tr(XY)``.

``Sym_+(1)`` doubles as the half-line (rank one cone).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ConeDomainError",
    "ConeDescriptor",
    "ConePoint",
    "SpectralDecomposition",
    "lightcone",
    "sym_cone",
    "half_line",
    "parse_cone",
    "jordan_product",
    "determinant",
    "principal_minors",
    "generalized_power",
    "spectral_decompose",
    "power_map",
    "quadratic_rep_apply",
    "reverse_index",
]

SQRT2 = np.sqrt(2.0)
INTERIOR_RTOL = 1e-12


class ConeDomainError(ValueError):
    """Raised when a point or parameter lies outside the admissible domain."""


@dataclass(frozen=True)
class ConeDescriptor:
    """Which symmetric cone we are working in.

    Use :func:`lightcone`, :func:`sym_cone` or :func:`half_line` to build one.

    Attributes
    ----------
    kind : {"lightcone", "sym"}
    rank : int
        Rank ``r`` of the Jordan algebra.
    dim : int
        Real dimension ``n`` of the ambient space.
    size : int
        ``n`` for the light cone (its index), matrix size for ``sym``.
    """

    kind: str
    rank: int
    dim: int
    size: int
    _packing: tuple = field(default=(), repr=False, compare=False)

    # -- basic constants -------------------------------------------------
    @property
    def d(self) -> float:
        """Peirce dimension ``2 (n/r - 1) / (r - 1)`` (0 in rank one)."""
        if self.rank == 1:
            return 0.0
        return 2.0 * (self.dim / self.rank - 1.0) / (self.rank - 1)

    @property
    def n_over_r(self) -> float:
        return self.dim / self.rank

    @property
    def identity(self) -> np.ndarray:
        e = np.zeros(self.dim)
        if self.kind == "lightcone":
            e[0] = 1.0
        else:
            e[: self.size] = 1.0
        return e

    @property
    def name(self) -> str:
        if self.kind == "lightcone":
            return f"lightcone{self.size}"
        if self.size == 1:
            return "halfline"
        return f"sym{self.size}"

    def __str__(self) -> str:
        return self.name

    def point(self, coords) -> "ConePoint":
        return ConePoint(np.asarray(coords, dtype=float), self)

    # -- matrix packing for Sym ------------------------------------------
    def to_matrix(self, x):
        """Unpack ``(..., n)`` coordinates into ``(..., r, r)`` matrices."""
        self._need_sym()
        x = np.asarray(x)
        r = self.size
        rows, cols = self._packing
        M = np.zeros(x.shape[:-1] + (r, r), dtype=x.dtype)
        M[..., np.arange(r), np.arange(r)] = x[..., :r]
        off = x[..., r:] / SQRT2
        M[..., rows, cols] = off
        M[..., cols, rows] = off
        return M

    def from_matrix(self, M):
        """Pack symmetric ``(..., r, r)`` matrices into coordinates."""
        self._need_sym()
        M = np.asarray(M)
        r = self.size
        rows, cols = self._packing
        diag = M[..., np.arange(r), np.arange(r)]
        off = 0.5 * (M[..., rows, cols] + M[..., cols, rows]) * SQRT2
        return np.concatenate([diag, off], axis=-1)

    def _need_sym(self):
        if self.kind != "sym":
            raise TypeError(f"{self.name} has no matrix representation")

    # -- algebra ---------------------------------------------------------
    def product(self, x, y):
        """Jordan product ``x o y``."""
        x, y = np.asarray(x), np.asarray(y)
        if self.kind == "lightcone":
            first = np.sum(x * y, axis=-1, keepdims=True)
            rest = x[..., :1] * y[..., 1:] + y[..., :1] * x[..., 1:]
            return np.concatenate([np.broadcast_to(first, rest.shape[:-1] + (1,)), rest], axis=-1)
        X, Y = self.to_matrix(x), self.to_matrix(y)
        return self.from_matrix(0.5 * (X @ Y + Y @ X))

    def inner(self, x, y):
        """Trace form ``(x|y) = tr(x o y)``."""
        s = np.einsum("...i,...i->...", np.asarray(x), np.asarray(y))
        return 2.0 * s if self.kind == "lightcone" else s

    def trace(self, x):
        x = np.asarray(x)
        if self.kind == "lightcone":
            return 2.0 * x[..., 0]
        return np.sum(x[..., : self.size], axis=-1)

    def norm(self, x):
        return np.sqrt(np.abs(self.inner(x, x)))

    def minors(self, x):
        """Principal minors ``(Delta_1, ..., Delta_r)`` in the fixed frame.

        Light cone: ``Delta_1 = x_1 - x_2`` and ``Delta_2 = x_1^2 - |x'|^2``.
        Sym: leading principal minors.  Complex input is accepted (the
        minors are polynomials).
        """
        x = np.asarray(x)
        if self.kind == "lightcone":
            d1 = x[..., 0] - x[..., 1]
            d2 = x[..., 0] ** 2 - np.sum(x[..., 1:] ** 2, axis=-1)
            return np.stack([d1, d2], axis=-1)
        M = self.to_matrix(x)
        return np.stack(
            [np.linalg.det(M[..., :k, :k]) for k in range(1, self.size + 1)],
            axis=-1,
        )

    def minors_rotated(self, x):
        """Minors in the reversed frame ``(c_r, ..., c_1)``."""
        x = np.asarray(x)
        if self.kind == "lightcone":
            d1 = x[..., 0] + x[..., 1]
            d2 = x[..., 0] ** 2 - np.sum(x[..., 1:] ** 2, axis=-1)
            return np.stack([d1, d2], axis=-1)
        M = self.to_matrix(x)
        r = self.size
        return np.stack(
            [np.linalg.det(M[..., r - k:, r - k:]) for k in range(1, r + 1)],
            axis=-1,
        )

    def det(self, x):
        """Jordan determinant ``Delta(x)``."""
        x = np.asarray(x)
        if self.kind == "lightcone":
            return x[..., 0] ** 2 - np.sum(x[..., 1:] ** 2, axis=-1)
        return np.linalg.det(self.to_matrix(x))

    def spectral(self, x):
        """Eigenvalues (ascending) and Jordan frame of ``x``.

        Returns
        -------
        lam : ndarray, shape (..., r)
        frame : ndarray, shape (..., r, n)
            ``frame[..., i, :]`` is the idempotent paired with ``lam[..., i]``.
        """
        x = np.asarray(x, dtype=float)
        if self.kind == "lightcone":
            xp = x[..., 1:]
            rho = np.linalg.norm(xp, axis=-1)
            # x' = 0: fall back to the second coordinate axis
            axis = np.zeros_like(xp)
            axis[..., 0] = 1.0
            safe = np.where(rho > 0, rho, 1.0)[..., None]
            omega = np.where((rho > 0)[..., None], xp / safe, axis)
            lam = np.stack([x[..., 0] - rho, x[..., 0] + rho], axis=-1)
            half = np.full(x.shape[:-1] + (1,), 0.5)
            c1 = np.concatenate([half, -0.5 * omega], axis=-1)
            c2 = np.concatenate([half, 0.5 * omega], axis=-1)
            return lam, np.stack([c1, c2], axis=-2)
        w, V = np.linalg.eigh(self.to_matrix(x))
        proj = V[..., :, None, :] * V[..., None, :, :]  # (..., r, r, r) col-major
        proj = np.moveaxis(proj, -1, -3)  # (..., k, r, r) = v_k v_k^T
        return w, self.from_matrix(proj)

    def from_spectral(self, lam, frame):
        return np.sum(np.asarray(lam)[..., None] * frame, axis=-2)

    def spectral_map(self, x, func: Callable[[np.ndarray], np.ndarray]):
        """Apply ``func`` to the eigenvalues of ``x`` (functional calculus)."""
        lam, frame = self.spectral(x)
        return self.from_spectral(func(lam), frame)

    def power(self, x, t: float, check: bool = True):
        """``x**t`` through the spectral frame."""
        lam, frame = self.spectral(x)
        if check:
            self._check_interior_lam(lam, x)
        return self.from_spectral(lam ** t, frame)

    def inverse(self, x, check: bool = True):
        return self.power(x, -1.0, check=check)

    def log(self, x):
        lam, frame = self.spectral(x)
        self._check_interior_lam(lam, x)
        return self.from_spectral(np.log(lam), frame)

    def quad(self, a, x):
        """Quadratic representation ``P(a) x``."""
        a, x = np.asarray(a), np.asarray(x)
        if self.kind == "lightcone":
            ax = self.product(a, x)
            return 2.0 * self.product(a, ax) - self.product(self.product(a, a), x)
        A = self.to_matrix(a)
        return self.from_matrix(A @ self.to_matrix(x) @ A)

    def quad_matrix(self, a):
        """Matrix of the linear map ``P(a)`` on coordinates."""
        basis = np.eye(self.dim)
        return self.quad(np.broadcast_to(a, basis.shape), basis).T

    def is_interior(self, x):
        """Interior test: smallest eigenvalue above ``1e-12 (1 + |x|)``."""
        x = np.asarray(x, dtype=float)
        lam, _ = self.spectral(x)
        return lam[..., 0] > INTERIOR_RTOL * (1.0 + self.norm(x))

    def is_interior_sylvester(self, x):
        """Interior test through positivity of the principal minors."""
        return np.all(self.minors(x) > 0, axis=-1)

    def _check_interior_lam(self, lam, x):
        bad = ~(lam[..., 0] > INTERIOR_RTOL * (1.0 + self.norm(x)))
        if np.any(bad):
            raise ConeDomainError(f"point(s) not in the interior of {self.name}")

    def check_interior(self, x):
        lam, _ = self.spectral(x)
        self._check_interior_lam(lam, x)

    def generalized_power(self, x, s):
        """``Delta_s(x) = Delta_1^{s_1-s_2} ... Delta_r^{s_r}``."""
        self.check_interior(x)
        return _gen_power_from_minors(self.minors(x), self._index(s))

    def generalized_power_rotated(self, x, s):
        """Generalized power built on the reversed-frame minors."""
        self.check_interior(x)
        return _gen_power_from_minors(self.minors_rotated(x), self._index(s))

    def _index(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if s.shape[-1] == 1 and self.rank > 1:
            s = np.repeat(s, self.rank, axis=-1)
        if s.shape[-1] != self.rank:
            raise ValueError(
                f"multi-index has length {s.shape[-1]}, cone rank is {self.rank}"
            )
        return s

    def random_interior(self, rng, size=(), spread=1.0):
        """Random interior points: random frame, log-normal eigenvalues."""
        size = tuple(np.atleast_1d(size)) if size != () else ()
        lam = np.exp(spread * rng.standard_normal(size + (self.rank,)))
        if self.kind == "lightcone":
            w = rng.standard_normal(size + (self.dim - 1,))
            w /= np.linalg.norm(w, axis=-1, keepdims=True)
            lam = np.sort(lam, axis=-1)
            first = 0.5 * (lam[..., 0] + lam[..., 1])
            rest = 0.5 * (lam[..., 1] - lam[..., 0])[..., None] * w
            return np.concatenate([first[..., None], rest], axis=-1)
        G = rng.standard_normal(size + (self.size, self.size))
        Q, R = np.linalg.qr(G)
        Q = Q * np.sign(np.diagonal(R, axis1=-2, axis2=-1))[..., None, :]
        M = (Q * lam[..., None, :]) @ np.swapaxes(Q, -1, -2)
        return self.from_matrix(M)

    def random_vector(self, rng, size=()):
        size = tuple(np.atleast_1d(size)) if size != () else ()
        return rng.standard_normal(size + (self.dim,))


def _gen_power_from_minors(m, s):
    expo = s - np.concatenate([s[..., 1:], np.zeros_like(s[..., :1])], axis=-1)
    return np.exp(np.sum(expo * np.log(m), axis=-1))


def lightcone(n: int) -> ConeDescriptor:
    """Forward light cone ``Lambda_n`` in R^n (rank 2, n >= 3)."""
    if n < 3:
        raise ValueError("light cone needs n >= 3")
    return ConeDescriptor("lightcone", 2, n, n)


def sym_cone(r: int) -> ConeDescriptor:
    """Cone of positive definite real symmetric ``r x r`` matrices."""
    if r < 1:
        raise ValueError("matrix size must be positive")
    rows, cols = np.triu_indices(r, k=1)
    return ConeDescriptor("sym", r, r * (r + 1) // 2, r, (rows, cols))


def half_line() -> ConeDescriptor:
    """The rank-one cone ``(0, inf)``."""
    return sym_cone(1)


def parse_cone(spec: str) -> ConeDescriptor:
    """Parse names like ``lightcone3``, ``sym2`` or ``halfline``."""
    s = spec.strip().lower()
    try:
        if s in ("halfline", "half-line", "r1"):
            return half_line()
        if s.startswith("lightcone"):
            return lightcone(int(s[len("lightcone"):]))
        if s.startswith("sym"):
            return sym_cone(int(s[len("sym"):]))
    except ValueError as exc:
        raise ValueError(f"bad cone spec {spec!r}: {exc}") from None
    raise ValueError(f"unknown cone {spec!r}; use lightcone<n>, sym<r> or halfline")


# ---------------------------------------------------------------------------
# point-level API
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConePoint:
    """A vector of the ambient Jordan algebra, tagged with its cone."""

    coords: np.ndarray
    cone: ConeDescriptor

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.shape != (self.cone.dim,):
            raise ValueError(
                f"{self.cone.name} points have {self.cone.dim} coordinates, got shape {c.shape}"
            )
        object.__setattr__(self, "coords", c)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)

    def matrix(self):
        return self.cone.to_matrix(self.coords)


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    frame: tuple
    cone: ConeDescriptor

    def reconstruct(self) -> ConePoint:
        c = np.sum([l * f.coords for l, f in zip(self.eigenvalues, self.frame)], axis=0)
        return ConePoint(c, self.cone)


def _same_cone(*pts: ConePoint) -> ConeDescriptor:
    cone = pts[0].cone
    for p in pts[1:]:
        if p.cone != cone:
            raise ValueError(f"points live in different cones: {cone.name} vs {p.cone.name}")
    return cone


def jordan_product(x: ConePoint, y: ConePoint) -> ConePoint:
    """Jordan product of two points of the same algebra."""
    cone = _same_cone(x, y)
    return ConePoint(cone.product(x.coords, y.coords), cone)


def determinant(x: ConePoint) -> float:
    return float(x.cone.det(x.coords))


def principal_minors(x: ConePoint) -> np.ndarray:
    return x.cone.minors(x.coords)


def generalized_power(x: ConePoint, s: Sequence[float]) -> float:
    """``Delta_s(x)``; raises :class:`ConeDomainError` off the interior."""
    return float(x.cone.generalized_power(x.coords, s))


def reverse_index(s: Sequence[float]) -> np.ndarray:
    """``s* = (s_r, ..., s_1)``."""
    return np.asarray(s, dtype=float)[::-1].copy()


def spectral_decompose(x: ConePoint) -> SpectralDecomposition:
    """Ascending eigenvalues and matching frame.

    For the light cone with ``x' = 0`` the frame is taken along the second
    coordinate axis.
    """
    lam, frame = x.cone.spectral(x.coords)
    return SpectralDecomposition(lam, tuple(ConePoint(f, x.cone) for f in frame), x.cone)


def power_map(x: ConePoint, t: float) -> ConePoint:
    """``x**t`` (``t=-1`` inverse, ``t=1/2`` square root)."""
    return ConePoint(x.cone.power(x.coords, t), x.cone)


def quadratic_rep_apply(a: ConePoint, x: ConePoint) -> ConePoint:
    cone = _same_cone(a, x)
    return ConePoint(cone.quad(a.coords, x.coords), cone)
