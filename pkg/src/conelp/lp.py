"""Littlewood-Paley analysis for fields whose spectrum lives in the cone.

Fields are sampled on periodic Cartesian grids.  Frequencies use the
trace-dual pairing: the DFT kernel is ``exp(i (x|xi))``, so on the light cone
(where ``(x|xi) = 2 x . xi``) frequency coordinates are half the usual
angular wave numbers.  With this convention the wave operator with symbol
``Delta(xi)`` is ``-1/4 (d_1^2 - sum_k d_k^2)`` on the light cone.

Fourier transform conventions (trace-form Lebesgue measure on both sides)::

    f^(xi) = int f(x) exp(-i (x|xi)) dx,
    f(x)   = (2 pi)^{-n} int f^(xi) exp(i (x|xi)) dxi.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import geometry as geo
from .jordan import ConeDescriptor, ConeDomainError, lightcone, parse_cone
from .lattice import Lattice, LightConeGrid, ShellRegion, sample_region, shell_box

__all__ = [
    "MEMORY_CAP",
    "AliasingError",
    "GridField",
    "make_grid",
    "gaussian_spectrum_field",
    "plane_wave_field",
    "BumpProfile",
    "FilterBank",
    "build_filter_bank",
    "partition_error",
    "lp_project",
    "lp_blocks",
    "lp_norm",
    "block_norms",
    "BesovResult",
    "besov_seminorm",
    "apply_multiplier",
    "box_power",
    "box_finite_difference",
    "bernstein_polynomial",
    "bernstein_check",
    "mihlin_apply",
    "ConstantProbeReport",
    "lp_constant_probe",
    "SpectralGaussian",
    "family_spec",
    "test_family",
]

MEMORY_CAP = 1 << 24  # samples per grid
OCCUPIED_RTOL = 1e-13  # |f^| below this fraction of the maximum counts as empty


class AliasingError(ValueError):
    """Spectrum does not fit the grid with the required margin."""


def _pairing(cone: ConeDescriptor) -> float:
    return 2.0 if cone.kind == "lightcone" else 1.0


def _axes(origin, spacing, shape):
    return [origin[k] + spacing[k] * np.arange(shape[k]) for k in range(len(shape))]


def _mesh(axes):
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


# ---------------------------------------------------------------------------
# sampled fields
# ---------------------------------------------------------------------------

@dataclass
class GridField:
    """Samples of a function on a regular grid, in space or in frequency.

    Attributes
    ----------
    domain : {"space", "frequency"}
    origin, spacing : ndarray
        First grid point and step per axis.
    samples : ndarray of complex
    cone : ConeDescriptor
        Fixes the pairing between space and frequency coordinates.
    support : (ndarray, ndarray) or None
        Occupied frequency box ``(lo, hi)``, used for aliasing checks.
    conjugate_origin : ndarray or None
        Origin of the grid in the other domain, so transforms round-trip.
    """

    domain: str
    origin: np.ndarray
    spacing: np.ndarray
    samples: np.ndarray
    cone: ConeDescriptor
    support: tuple | None = None
    conjugate_origin: np.ndarray | None = None

    def __post_init__(self):
        if self.domain not in ("space", "frequency"):
            raise ValueError(f"unknown domain {self.domain!r}")
        self.origin = np.asarray(self.origin, dtype=float)
        self.spacing = np.asarray(self.spacing, dtype=float)
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.ndim != self.cone.dim or len(self.origin) != self.cone.dim \
                or len(self.spacing) != self.cone.dim:
            raise ValueError("grid dimension must match the cone dimension")
        if np.any(self.spacing <= 0):
            raise ValueError("spacing must be positive")
        if self.samples.size > MEMORY_CAP:
            raise MemoryError(f"grid of {self.samples.size} samples exceeds cap {MEMORY_CAP}")
        if self.support is not None:
            lo, hi = self.support
            self.support = (np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))

    @property
    def shape(self) -> tuple:
        return self.samples.shape

    @property
    def pairing(self) -> float:
        return _pairing(self.cone)

    @property
    def cell_volume(self) -> float:
        """Trace-form measure of one grid cell."""
        return float(np.prod(self.spacing)) * self.pairing ** (self.cone.dim / 2)

    def axes(self):
        return _axes(self.origin, self.spacing, self.shape)

    def points(self) -> np.ndarray:
        return _mesh(self.axes())

    def conjugate_grid(self):
        """``(origin, spacing)`` of the grid in the other domain."""
        N = np.array(self.shape)
        step = 2 * np.pi / (N * self.spacing * self.pairing)
        origin = self.conjugate_origin if self.conjugate_origin is not None else -(N // 2) * step
        return np.asarray(origin, dtype=float), step

    def frequency_axes(self):
        """Frequency axes of a space field (fft-shifted order)."""
        if self.domain != "space":
            return self.axes()
        N = np.array(self.shape)
        step = 2 * np.pi / (N * self.spacing * self.pairing)
        return _axes(-(N // 2) * step, step, self.shape)

    def nyquist(self) -> np.ndarray:
        """Largest representable frequency per axis."""
        h = self.spacing if self.domain == "space" else self.conjugate_grid()[1]
        return np.pi / (self.pairing * h)

    def _phase(self, x0, xi_axes):
        ph = np.ones(self.shape, dtype=complex)
        for k, ax in enumerate(xi_axes):
            shp = [1] * len(self.shape)
            shp[k] = -1
            ph = ph * np.exp(-1j * self.pairing * x0[k] * ax).reshape(shp)
        return ph

    def to_frequency(self) -> "GridField":
        if self.domain != "space":
            raise ValueError("field is already in frequency")
        xi_axes = self.frequency_axes()
        F = np.fft.fftshift(np.fft.fftn(self.samples)) * self.cell_volume
        F *= self._phase(self.origin, xi_axes)
        N = np.array(self.shape)
        step = 2 * np.pi / (N * self.spacing * self.pairing)
        return GridField("frequency", -(N // 2) * step, step, F, self.cone, self.support,
                         self.origin.copy())

    def to_space(self) -> "GridField":
        if self.domain != "frequency":
            raise ValueError("field is already in space")
        x0, h = self.conjugate_grid()
        vol = float(np.prod(h)) * self.pairing ** (self.cone.dim / 2)
        ph = self._phase(x0, self.axes())
        f = np.fft.ifftn(np.fft.ifftshift(self.samples / (vol * ph)))
        return GridField("space", x0, h, f, self.cone, self.support, self.origin.copy())

    def occupied_box(self, rtol: float = OCCUPIED_RTOL):
        """Bounding box of frequencies where the spectrum is above ``rtol * max``."""
        F = self if self.domain == "frequency" else self.to_frequency()
        mag = np.abs(F.samples)
        mask = mag > rtol * mag.max() if mag.max() > 0 else np.zeros_like(mag, bool)
        lo, hi = [], []
        for k, ax in enumerate(F.axes()):
            other = tuple(i for i in range(mag.ndim) if i != k)
            used = ax[mask.any(axis=other)]
            if used.size == 0:
                lo.append(0.0)
                hi.append(0.0)
            else:
                lo.append(used.min())
                hi.append(used.max())
        return np.array(lo), np.array(hi)

    def with_support(self) -> "GridField":
        """Copy with ``support`` filled in from the sampled spectrum."""
        out = self.copy()
        out.support = self.occupied_box()
        return out

    def copy(self, samples=None) -> "GridField":
        return GridField(self.domain, self.origin.copy(), self.spacing.copy(),
                         self.samples.copy() if samples is None else samples, self.cone,
                         self.support, None if self.conjugate_origin is None
                         else self.conjugate_origin.copy())

    def dilate(self, t: float) -> "GridField":
        """Space field ``x -> f(t x)``: same samples on a grid shrunk by ``t``."""
        if self.domain != "space":
            raise ValueError("dilate acts on space fields")
        sup = None if self.support is None else (t * self.support[0], t * self.support[1])
        return GridField("space", self.origin / t, self.spacing / t, self.samples.copy(),
                         self.cone, sup)

    def norm(self, p: float = 2.0) -> float:
        return lp_norm(self, p)

    # -- serialization ------------------------------------------------------
    def metadata(self) -> dict:
        return {
            "domain": self.domain,
            "cone": self.cone.name,
            "origin": self.origin.tolist(),
            "spacing": self.spacing.tolist(),
            "shape": list(self.shape),
            "support": None if self.support is None else [self.support[0].tolist(),
                                                          self.support[1].tolist()],
            "conjugate_origin": None if self.conjugate_origin is None
            else self.conjugate_origin.tolist(),
            "dtype": "complex128-le",
        }

    def save(self, path) -> tuple:
        """Write ``<path>.bin`` (little-endian float64 pairs) and ``<path>.json``."""
        path = Path(path)
        base = path.with_suffix("") if path.suffix in (".bin", ".json") else path
        binp, jsonp = base.with_suffix(".bin"), base.with_suffix(".json")
        np.ascontiguousarray(self.samples, dtype="<c16").tofile(binp)
        jsonp.write_text(json.dumps(self.metadata(), indent=2) + "\n")
        return binp, jsonp

    @classmethod
    def load(cls, path) -> "GridField":
        path = Path(path)
        base = path.with_suffix("") if path.suffix in (".bin", ".json") else path
        meta = json.loads(base.with_suffix(".json").read_text())
        data = np.fromfile(base.with_suffix(".bin"), dtype="<c16").reshape(meta["shape"])
        sup = meta.get("support")
        co = meta.get("conjugate_origin")
        return cls(meta["domain"], meta["origin"], meta["spacing"], data,
                   parse_cone(meta["cone"]),
                   None if sup is None else (np.array(sup[0]), np.array(sup[1])),
                   None if co is None else np.array(co))


def make_grid(cone: ConeDescriptor, band, shape, guard: float = 2.0) -> GridField:
    """Zero space field whose Nyquist frequency is ``guard * band`` per axis."""
    band = np.broadcast_to(np.asarray(band, dtype=float), (cone.dim,))
    shape = tuple(int(s) for s in np.broadcast_to(shape, (cone.dim,)))
    h = np.pi / (_pairing(cone) * guard * band)
    origin = -(np.array(shape) // 2) * h
    return GridField("space", origin, h, np.zeros(shape, complex), cone)


def _from_spectrum(grid: GridField, spec: np.ndarray) -> GridField:
    """Space field with the given spectrum on ``grid``'s frequency lattice."""
    N = np.array(grid.shape)
    step = 2 * np.pi / (N * grid.spacing * grid.pairing)
    F = GridField("frequency", -(N // 2) * step, step, spec, grid.cone, None, grid.origin.copy())
    f = F.to_space()
    f.support = F.occupied_box()
    return f


def gaussian_spectrum_field(grid: GridField, center, sigma: float, amplitude: complex = 1.0,
                            shift=None) -> GridField:
    """Field whose spectrum is ``amplitude * exp(-|xi - center|^2 / (2 sigma^2))``.

    ``shift`` translates the field in space (a phase in frequency).
    """
    xi = _mesh(grid.frequency_axes())
    center = np.asarray(center, dtype=float)
    r2 = np.sum((xi - center) ** 2, axis=-1)
    spec = amplitude * np.exp(-0.5 * r2 / sigma ** 2)
    if shift is not None:
        spec = spec * np.exp(-1j * grid.pairing * (xi @ np.asarray(shift, dtype=float)))
    return _from_spectrum(grid, spec)


def plane_wave_field(grid: GridField, frequencies, amplitudes) -> GridField:
    """``sum_k a_k exp(i (x|xi_k))`` sampled exactly on ``grid``.

    Frequencies are snapped to the grid's frequency lattice so the field is
    periodic on the grid.
    """
    freqs = np.atleast_2d(np.asarray(frequencies, dtype=float))
    amps = np.asarray(amplitudes, dtype=complex)
    N = np.array(grid.shape)
    step = 2 * np.pi / (N * grid.spacing * grid.pairing)
    snapped = np.round(freqs / step) * step
    x = grid.points()
    f = np.zeros(grid.shape, complex)
    for a, k in zip(amps, snapped):
        f += a * np.exp(1j * grid.pairing * (x @ k))
    lo, hi = snapped.min(axis=0), snapped.max(axis=0)
    return GridField("space", grid.origin, grid.spacing, f, grid.cone, (lo, hi))


# ---------------------------------------------------------------------------
# filter bank
# ---------------------------------------------------------------------------

def _smooth_zero(x, sharpness):
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    out[pos] = np.exp(-sharpness / x[pos])
    return out


@dataclass(frozen=True)
class BumpProfile:
    """Smooth radial profile: 1 on ``t <= inner``, 0 on ``t >= outer``.

    The transition is the ratio ``h(1-u) / (h(1-u) + h(u))`` with
    ``h(x) = exp(-sharpness / x)``, which is C-infinity and flat at both ends.
    """

    inner: float = 1.0
    outer: float = 2.0
    sharpness: float = 1.0

    def __post_init__(self):
        if not 0 < self.inner < self.outer:
            raise ValueError("need 0 < inner < outer")
        if self.sharpness <= 0:
            raise ValueError("sharpness must be positive")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        u = np.clip((t - self.inner) / (self.outer - self.inner), 0.0, 1.0)
        a = _smooth_zero(1.0 - u, self.sharpness)
        b = _smooth_zero(u, self.sharpness)
        return a / (a + b)

    def scaled(self, k: float) -> "BumpProfile":
        return BumpProfile(self.inner * k, self.outer * k, self.sharpness)


@dataclass
class FilterBank:
    """Sampled smooth partition of unity subordinate to a lattice.

    ``psi_hat[j] = phi_j / Phi`` on covered frequencies (within the covering
    radius of some lattice point) and 0 elsewhere, where
    ``phi_j(xi) = profile(d(xi, xi_j))``.
    """

    lattice: Lattice
    origin: np.ndarray  # frequency grid
    spacing: np.ndarray
    shape: tuple
    profile: BumpProfile
    psi_hat: np.ndarray  # (J, *shape)
    Phi: np.ndarray
    covered: np.ndarray
    overlap: int
    phi_bounds: tuple  # (min Phi on covered, max Phi)

    @property
    def cone(self) -> ConeDescriptor:
        return self.lattice.cone

    def __len__(self):
        return len(self.lattice)

    def axes(self):
        return _axes(self.origin, self.spacing, self.shape)

    def evaluate(self, points):
        """``(psi (m, J), covered (m,), Phi (m,))`` at arbitrary frequencies."""
        cone = self.cone
        pts = np.asarray(points, dtype=float).reshape(-1, cone.dim)
        inside = cone.is_interior(pts)
        phi = np.zeros((len(pts), len(self)))
        dmin = np.full(len(pts), np.inf)
        if np.any(inside):
            d = _distances(cone, pts[inside], self.lattice.points)
            phi[inside] = self.profile(d)
            dmin[inside] = d.min(axis=1)
        Phi = phi.sum(axis=1)
        covered = dmin < self.lattice.radius
        psi = np.where(covered[:, None], phi / np.where(Phi > 0, Phi, 1.0)[:, None], 0.0)
        return psi, covered, Phi

    def chi_hat(self, j: int) -> np.ndarray:
        """Enlarged cutoff: 1 on ``B_{2 outer/2}(xi_j)``, 0 off ``B_{2 outer}``."""
        prof = BumpProfile(self.profile.outer, 2 * self.profile.outer, self.profile.sharpness)
        pts = _mesh(self.axes()).reshape(-1, self.cone.dim)
        out = np.zeros(len(pts))
        inside = self.cone.is_interior(pts)
        out[inside] = prof(geo.distance(self.cone, pts[inside], self.lattice.points[j]))
        return out.reshape(self.shape)

    def support_box(self, j: int):
        cache = self.__dict__.setdefault("_boxes", {})
        if j not in cache:
            cache[j] = self._support_box(j)
        return cache[j]

    def _support_box(self, j: int):
        mask = self.psi_hat[j] > 0
        lo, hi = [], []
        for k, ax in enumerate(self.axes()):
            other = tuple(i for i in range(mask.ndim) if i != k)
            used = ax[mask.any(axis=other)]
            lo.append(used.min() if used.size else 0.0)
            hi.append(used.max() if used.size else 0.0)
        return np.array(lo), np.array(hi)

    def check_grid(self, f: GridField):
        if f.cone != self.cone:
            raise ValueError("field and filter bank live on different cones")
        if f.domain != "space":
            raise ValueError("expected a space field")
        ax = f.frequency_axes()
        scale = np.max(np.abs(self.spacing)) * max(self.shape)
        if tuple(f.shape) != tuple(self.shape) or not all(
                np.allclose(a, b, rtol=0, atol=1e-9 * scale) for a, b in zip(ax, self.axes())):
            raise ValueError("field grid does not match the filter bank grid")


def _distances(cone, pts, centers, chunk=16384):
    out = np.empty((len(pts), len(centers)))
    for s in range(0, len(pts), chunk):
        out[s:s + chunk] = geo.distance(cone, pts[s:s + chunk, None, :], centers[None, :, :])
    return out


def build_filter_bank(lattice: Lattice, grid: GridField,
                      profile: BumpProfile | None = None) -> FilterBank:
    """Sample ``psi_hat_j`` on the frequency grid of ``grid``.

    Raises
    ------
    ValueError
        The grid does not contain the lattice region, or ``Phi`` drops below
        ``1 / overlap`` at a covered frequency.
    """
    cone = lattice.cone
    if grid.cone != cone:
        raise ValueError("grid and lattice live on different cones")
    profile = profile or BumpProfile()
    if grid.domain == "space":
        axes = grid.frequency_axes()
    else:
        axes = grid.axes()
    origin = np.array([a[0] for a in axes])
    spacing = np.array([a[1] - a[0] for a in axes])
    top = np.array([a[-1] for a in axes])
    center, half = shell_box(cone, lattice.region)
    if np.any(center - half < origin - 1e-12) or np.any(center + half > top + 1e-12):
        raise ValueError("frequency grid does not cover the lattice region")
    shape = tuple(len(a) for a in axes)
    pts = _mesh(axes).reshape(-1, cone.dim)
    inside = np.flatnonzero(cone.is_interior(pts))
    d = _distances(cone, pts[inside], lattice.points)
    phi = profile(d)
    Phi_in = phi.sum(axis=1)
    cov_in = d.min(axis=1) < lattice.radius
    overlap = int((phi > 0).sum(axis=1).max()) if len(phi) else 0
    if np.any(cov_in):
        low = float(Phi_in[cov_in].min())
        if low < 1.0 / max(overlap, 1):
            raise ValueError(f"Phi = {low:.3g} below the floor 1/{overlap} at a covered frequency")
    else:
        low = float("nan")
    J = len(lattice)
    psi = np.zeros((J, len(pts)))
    safe = np.where(Phi_in > 0, Phi_in, 1.0)
    psi[:, inside] = np.where(cov_in[None, :], (phi / safe[:, None]).T, 0.0)
    Phi = np.zeros(len(pts))
    Phi[inside] = Phi_in
    covered = np.zeros(len(pts), bool)
    covered[inside] = cov_in
    return FilterBank(lattice, origin, spacing, shape, profile, psi.reshape((J,) + shape),
                      Phi.reshape(shape), covered.reshape(shape), overlap,
                      (low, float(Phi.max())))


def partition_error(bank: FilterBank, samples: int = 10_000, seed: int = 0) -> dict:
    """``max |sum_j psi_hat_j - 1|`` on covered grid nodes and on random
    covered points of the lattice region."""
    total = bank.psi_hat.sum(axis=0)
    grid_err = float(np.max(np.abs(total[bank.covered] - 1.0))) if bank.covered.any() else 0.0
    pts = sample_region(bank.cone, bank.lattice.region, samples, seed=seed)
    psi, cov, Phi = bank.evaluate(pts)
    off_err = float(np.max(np.abs(psi[cov].sum(axis=1) - 1.0))) if cov.any() else 0.0
    return {"grid": grid_err, "samples": off_err, "covered_samples": int(cov.sum()),
            "phi_min": bank.phi_bounds[0], "phi_max": bank.phi_bounds[1],
            "overlap": bank.overlap}


# ---------------------------------------------------------------------------
# block decomposition and Besov seminorms
# ---------------------------------------------------------------------------

def _guard(f: GridField, margin: float = 2.0):
    if f.support is None:
        lo, hi = f.occupied_box()
    else:
        lo, hi = f.support
    band = np.maximum(np.abs(lo), np.abs(hi))
    limit = f.nyquist() / margin
    if np.any(band > limit * (1 + 1e-12)):
        axis = int(np.argmax(band / limit))
        raise AliasingError(
            f"occupied frequency {band[axis]:.6g} on axis {axis} exceeds the "
            f"guarded limit {limit[axis]:.6g} (Nyquist / {margin})"
        )


def apply_multiplier(f: GridField, m_hat: np.ndarray) -> GridField:
    """``F^{-1}(m f^)`` with ``m_hat`` sampled on the (fft-shifted) frequency grid."""
    g = np.fft.ifftn(np.fft.fftn(f.samples) * np.fft.ifftshift(m_hat))
    return f.copy(samples=g)


def lp_blocks(f: GridField, bank: FilterBank, indices: Sequence[int] | None = None):
    """All blocks ``f * psi_j`` (one forward transform)."""
    bank.check_grid(f)
    _guard(f)
    F = np.fft.fftn(f.samples)
    idx = range(len(bank)) if indices is None else indices
    out = []
    for j in idx:
        g = f.copy(samples=np.fft.ifftn(F * np.fft.ifftshift(bank.psi_hat[j])))
        g.support = bank.support_box(j)
        out.append(g)
    return out


def block_norms(f: GridField, bank: FilterBank, ps, block_rtol: float = 1e-15) -> dict:
    """``{p: [||f * psi_j||_p for j]}`` for several exponents at once.

    Blocks whose spectrum ``|f^ psi_hat_j|`` stays below ``block_rtol`` times
    ``max |f^|`` are reported as 0 without an inverse transform.
    """
    bank.check_grid(f)
    _guard(f)
    ps = [ps] if np.isscalar(ps) else list(ps)
    F = np.fft.fftshift(np.fft.fftn(f.samples))
    top = np.abs(F).max()
    out = {p: np.zeros(len(bank)) for p in ps}
    for j in range(len(bank)):
        G = F * bank.psi_hat[j]
        if top == 0 or np.abs(G).max() <= block_rtol * top:
            continue
        g = f.copy(samples=np.fft.ifftn(np.fft.ifftshift(G)))
        for p in ps:
            out[p][j] = lp_norm(g, p)
    return out


def lp_project(f: GridField, bank: FilterBank, j: int) -> GridField:
    """``f * psi_j`` via DFT multiplication."""
    return lp_blocks(f, bank, [j])[0]


def lp_norm(f: GridField, p: float) -> float:
    """Riemann-sum ``L^p`` norm (trace-form measure)."""
    a = np.abs(f.samples)
    if np.isinf(p):
        return float(a.max())
    return float((np.sum(a ** p) * f.cell_volume) ** (1.0 / p))


@dataclass
class BesovResult:
    value: float
    terms: np.ndarray  # Delta^{-nu}(xi_j) ||f * psi_j||_p^q
    block_norms: np.ndarray

    def __float__(self):
        return self.value


def besov_seminorm(f: GridField, bank: FilterBank, nu: float, p: float, q: float,
                   block_rtol: float = 1e-15, norms=None) -> BesovResult:
    """``(sum_j Delta(xi_j)^{-nu} ||f * psi_j||_p^q)^{1/q}``.

    ``norms`` may carry precomputed block norms (see :func:`block_norms`);
    ``block_rtol`` is passed on otherwise.
    """
    if not (1 <= p < np.inf and 1 <= q < np.inf):
        raise ValueError("p and q must be finite and >= 1")
    if norms is None:
        norms = block_norms(f, bank, p, block_rtol)[p]
    norms = np.asarray(norms, dtype=float)
    weights = bank.cone.det(bank.lattice.points) ** (-nu)
    terms = weights * norms ** q
    return BesovResult(float(math.fsum(terms) ** (1.0 / q)), terms, norms)


# ---------------------------------------------------------------------------
# wave operator and multipliers
# ---------------------------------------------------------------------------

def _freq_points(f: GridField):
    return _mesh(f.frequency_axes())


def _occupied_mask(f: GridField, rtol: float = OCCUPIED_RTOL):
    F = np.abs(np.fft.fftshift(np.fft.fftn(f.samples)))
    return F > rtol * F.max() if F.max() > 0 else np.zeros(F.shape, bool)


def box_power(f: GridField, beta: float) -> GridField:
    """``Box^beta f = F^{-1}(Delta^beta f^)``.

    Integer ``beta >= 0`` uses the polynomial symbol everywhere.  Otherwise
    the occupied spectrum must lie in the open cone; the symbol is set to 0
    at frequencies outside it.
    """
    if f.domain != "space":
        raise ValueError("box_power acts on space fields")
    if beta == 0:
        return f.copy()
    _guard(f)
    cone = f.cone
    xi = _freq_points(f)
    if float(beta).is_integer() and beta > 0:
        return apply_multiplier(f, cone.det(xi) ** int(beta))
    occ = _occupied_mask(f)
    inside = cone.is_interior(xi)
    if np.any(occ & ~inside):
        raise ConeDomainError("spectrum touches the boundary of the cone; Box^beta undefined")
    m = np.zeros(f.shape)
    m[inside] = cone.det(xi[inside]) ** beta
    return apply_multiplier(f, m)


def box_finite_difference(f: GridField) -> GridField:
    """Wave operator by periodic central differences.

    Light cone: ``-1/4 (d_1^2 - sum_{k>=2} d_k^2)``; half-line:
    ``(1/i) d/dx``; other rank-two cones use the quadratic form of ``Delta``
    with mixed differences.  Second order in the spacing.
    """
    cone = f.cone
    u = f.samples
    if cone.kind == "lightcone":
        out = np.zeros_like(u)
        for k in range(cone.dim):
            h = f.spacing[k]
            d2 = (np.roll(u, -1, k) - 2 * u + np.roll(u, 1, k)) / (h * h)
            out += d2 if k == 0 else -d2
        return f.copy(samples=-0.25 * out)
    if cone.rank == 1:
        h = f.spacing[0]
        return f.copy(samples=(np.roll(u, -1, 0) - np.roll(u, 1, 0)) / (2 * h) / 1j)
    if cone.rank == 2:
        A = _det_quadratic_form(cone)
        c = _pairing(cone)
        out = np.zeros_like(u)
        for k in range(cone.dim):
            for l in range(cone.dim):
                if A[k, l] == 0:
                    continue
                hk, hl = f.spacing[k], f.spacing[l]
                if k == l:
                    d2 = (np.roll(u, -1, k) - 2 * u + np.roll(u, 1, k)) / (hk * hk)
                else:
                    d2 = (np.roll(np.roll(u, -1, k), -1, l) - np.roll(np.roll(u, -1, k), 1, l)
                          - np.roll(np.roll(u, 1, k), -1, l)
                          + np.roll(np.roll(u, 1, k), 1, l)) / (4 * hk * hl)
                out += A[k, l] * d2
        return f.copy(samples=-out / c ** 2)
    raise NotImplementedError("finite-difference wave operator needs rank at most 2")


def _det_quadratic_form(cone: ConeDescriptor) -> np.ndarray:
    """Symmetric ``A`` with ``Delta(xi) = xi^T A xi`` (rank two), by polarization."""
    E = np.eye(cone.dim)
    diag = cone.det(E)
    pair = cone.det(E[:, None, :] + E[None, :, :])
    # Delta(e_k + e_l) = A_kk + A_ll + 2 A_kl; also right on the diagonal
    return 0.5 * (pair - diag[:, None] - diag[None, :])


def bernstein_polynomial(cone: ConeDescriptor, lam: float) -> float:
    """``b(lam) = (-1)^r lam (lam + d/2) ... (lam + (r-1) d/2)``."""
    r, d = cone.rank, cone.d
    return float((-1) ** r * np.prod([lam + k * d / 2 for k in range(r)]))


def _box_fd_pointwise(cone, u, x, h):
    """Central-difference wave operator of a callable at points ``x``."""
    if cone.kind == "lightcone":
        acc = 0.0
        for k in range(cone.dim):
            e = np.zeros(cone.dim)
            e[k] = h
            d2 = (u(x + e) - 2 * u(x) + u(x - e)) / (h * h)
            acc = acc + (d2 if k == 0 else -d2)
        return -0.25 * acc
    if cone.rank == 1:
        return (u(x + h) - u(x - h)) / (2 * h) / 1j
    if cone.rank == 2:
        # Delta(d / (i c)) = -c^{-2} sum_kl A_kl d_k d_l
        A = _det_quadratic_form(cone)
        E = h * np.eye(cone.dim)
        acc = 0.0
        for k in range(cone.dim):
            for l in range(cone.dim):
                if A[k, l] == 0:
                    continue
                if k == l:
                    d2 = (u(x + E[k]) - 2 * u(x) + u(x - E[k])) / (h * h)
                else:
                    d2 = (u(x + E[k] + E[l]) - u(x + E[k] - E[l]) - u(x - E[k] + E[l])
                          + u(x - E[k] - E[l])) / (4 * h * h)
                acc = acc + A[k, l] * d2
        return -acc / _pairing(cone) ** 2
    raise NotImplementedError("finite-difference wave operator needs rank at most 2")


def bernstein_check(m: int, cone: ConeDescriptor | None = None, y0=None, points: int = 64,
                    h: float = 1e-2, seed: int = 0) -> dict:
    """Measure ``Box[Delta^m(z/i)] / Delta^{m-1}(z/i)`` at ``z = x + i y0``.

    Finite differences at steps ``h`` and ``h/2`` are Richardson-extrapolated.
    The ratio should be the constant ``b(m)``; its sign is reported as
    measured.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    cone = cone or lightcone(3)
    y0 = cone.identity if y0 is None else np.asarray(y0, dtype=float)
    cone.check_interior(y0)
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, (points, cone.dim))

    def u(pts):
        return cone.det(y0 - 1j * pts) ** m

    fine = _box_fd_pointwise(cone, u, x, h / 2)
    coarse = _box_fd_pointwise(cone, u, x, h)
    box = (4 * fine - coarse) / 3
    ratio = box / cone.det(y0 - 1j * x) ** (m - 1)
    mean = complex(np.mean(ratio))
    var = float(np.mean(np.abs(ratio - mean) ** 2))
    expected = bernstein_polynomial(cone, m)
    return {
        "m": m,
        "cone": cone.name,
        "ratio_mean": [mean.real, mean.imag],
        "ratio_variance": var,
        "expected": expected,
        "measured_sign": int(np.sign(mean.real)),
        "abs_rel_error": abs(abs(mean) - abs(expected)) / abs(expected),
        "rel_error": abs(mean - expected) / abs(expected),
    }


def mihlin_apply(f: GridField, m: Callable[[np.ndarray], np.ndarray]) -> GridField:
    """``m(Box) f = F^{-1}(m(Delta) f^)`` for a symbol on ``(0, inf)``.

    The symbol is evaluated at interior frequencies and set to 0 outside the
    cone.  Raises if it is not finite on the occupied spectrum.
    """
    if f.domain != "space":
        raise ValueError("mihlin_apply acts on space fields")
    _guard(f)
    cone = f.cone
    xi = _freq_points(f)
    inside = cone.is_interior(xi)
    vals = np.zeros(f.shape, dtype=complex)
    with np.errstate(all="ignore"):
        vals[inside] = np.asarray(m(cone.det(xi[inside])), dtype=complex)
    occ = _occupied_mask(f)
    if np.any(occ & ~inside):
        raise ConeDomainError("spectrum leaves the cone")
    if not np.all(np.isfinite(vals[occ])):
        raise ValueError("symbol is not finite on the occupied spectrum")
    vals[~np.isfinite(vals)] = 0.0
    return apply_multiplier(f, vals)


# ---------------------------------------------------------------------------
# test family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralGaussian:
    """Sum of Gaussians in frequency, ``sum_k c_k exp(-|xi - a_k|^2 / (2 s_k^2))``.

    Stored analytically so the same field can be sampled on any grid.
    """

    centers: np.ndarray
    sigmas: np.ndarray
    coefs: np.ndarray

    def sample(self, grid: GridField) -> GridField:
        xi = _mesh(grid.frequency_axes())
        spec = np.zeros(grid.shape, complex)
        for a, s, c in zip(self.centers, self.sigmas, self.coefs):
            spec += c * np.exp(-0.5 * np.sum((xi - a) ** 2, axis=-1) / s ** 2)
        return _from_spectrum(grid, spec)

    def to_dict(self):
        return {"centers": np.asarray(self.centers).tolist(),
                "sigmas": np.asarray(self.sigmas).tolist(),
                "coefs": [[c.real, c.imag] for c in np.asarray(self.coefs, complex)]}


def family_spec(bank: FilterBank, grid: GridField | None = None, count: int = 10,
                width: float = 0.05, seed: int = 0, within: ShellRegion | None = None,
                leak: float = 1e-10) -> list:
    """Fixed family of band-limited fields for the bounded-ratio checks.

    Gaussians in frequency centred at lattice points taken from three scale
    groups (by ``log Delta``), widths ``width * lambda_min(xi_j)``, plus two
    superpositions of three of them with random complex coefficients.  Only
    centres whose Gaussian sits inside the covered set (relative L2 mass
    outside below ``leak``) and passes the aliasing guard on ``grid`` are
    used; ``within`` further restricts the centres to a shell.

    Returns
    -------
    list of SpectralGaussian
    """
    cone = bank.cone
    rng = np.random.default_rng(seed)
    if grid is None:
        N = np.array(bank.shape)
        h = 2 * np.pi / (N * bank.spacing * _pairing(cone))
        grid = GridField("space", -(N // 2) * h, h, np.zeros(bank.shape, complex), cone)
    pts = bank.lattice.points
    logdet = np.log(cone.det(pts))
    lam_min = cone.spectral(pts)[0][:, 0]
    order = np.argsort(logdet)
    if within is not None:
        order = order[within.contains(cone, pts[order])]
    groups = np.array_split(order, 3)
    xi = _mesh(grid.frequency_axes())
    single_count = count - 2
    per = [single_count // 3 + (1 if i < single_count % 3 else 0) for i in range(3)]
    chosen = []
    for g, want in zip(groups, per):
        got = 0
        for j in rng.permutation(g):
            if got == want:
                break
            sigma = width * lam_min[j]
            spec = np.exp(-0.5 * np.sum((xi - pts[j]) ** 2, axis=-1) / sigma ** 2)
            outside = np.sqrt(np.sum(spec[~bank.covered] ** 2) / np.sum(spec ** 2))
            if outside > leak:
                continue
            member = SpectralGaussian(pts[j][None, :].copy(), np.array([sigma]),
                                      np.array([1.0 + 0j]))
            try:
                _guard(member.sample(grid))
            except AliasingError:
                continue
            chosen.append(member)
            got += 1
    if len(chosen) < single_count:
        raise ValueError(f"only {len(chosen)} admissible centres for the test family")
    family = list(chosen)
    for _ in range(count - len(family)):
        pick = rng.choice(len(chosen), 3, replace=False)
        coef = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        family.append(SpectralGaussian(
            np.concatenate([chosen[i].centers for i in pick]),
            np.concatenate([chosen[i].sigmas for i in pick]), coef))
    return family


def test_family(bank: FilterBank, grid: GridField | None = None, **kwargs) -> list:
    """:func:`family_spec` sampled on ``grid`` (default: the bank's grid)."""
    if grid is None:
        N = np.array(bank.shape)
        h = 2 * np.pi / (N * bank.spacing * _pairing(bank.cone))
        grid = GridField("space", -(N // 2) * h, h, np.zeros(bank.shape, complex), bank.cone)
    return [m.sample(grid) for m in family_spec(bank, grid, **kwargs)]


# ---------------------------------------------------------------------------
# inequality-constant probes
# ---------------------------------------------------------------------------

@dataclass
class ConstantProbeReport:
    p: float
    s: float
    mu: float
    trials: int
    shells: list  # per shell: {"shell", "count", "max_ratio"}
    growth_exponent: float  # fitted slope of log2(max ratio) against the shell index
    overlap: int | None
    guaranteed_branch: bool
    bounded: bool | None
    mode: str
    notes: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "mode": self.mode,
            "p": self.p,
            "s": self.s,
            "mu": self.mu,
            "trials": self.trials,
            "shells": self.shells,
            "growth_exponent": self.growth_exponent,
            "overlap": self.overlap,
            "guaranteed_branch": self.guaranteed_branch,
            "bounded": self.bounded,
            "notes": self.notes,
        }


def _fit_slope(js, ratios):
    if len(js) < 2:
        return 0.0
    return float(np.polyfit(np.asarray(js, float), np.log2(np.asarray(ratios)), 1)[0])


def _bank_probe(bank: FilterBank, p, s, mu, trials, seed):
    cone = bank.cone
    rng = np.random.default_rng(seed)
    N = np.array(bank.shape)
    h = 2 * np.pi / (N * bank.spacing * _pairing(cone))
    vol = float(np.prod(h)) * _pairing(cone) ** (cone.dim / 2)
    # dyadic shells of the trace
    tr = cone.trace(bank.lattice.points)
    shell_id = np.floor(np.log2(tr / tr.min())).astype(int)
    # block profiles in space and their L^p norms (translation does not change them)
    blocks = [np.fft.ifftn(np.fft.ifftshift(bank.psi_hat[j])) for j in range(len(bank))]
    bnorm = np.array([(np.sum(np.abs(b) ** p) * vol) ** (1 / p) for b in blocks])
    rows = []
    for sh in np.unique(shell_id):
        members = np.flatnonzero(shell_id == sh)
        best = 0.0
        for t in range(trials):
            if t == 0:
                coef = np.ones(len(members), complex)
                shifts = np.zeros((len(members), cone.dim), int)
            else:
                coef = rng.standard_normal(len(members)) + 1j * rng.standard_normal(len(members))
                shifts = rng.integers(0, N, size=(len(members), cone.dim))
            total = np.zeros(bank.shape, complex)
            for c, j, sft in zip(coef, members, shifts):
                total += c * np.roll(blocks[j], tuple(sft), axis=tuple(range(cone.dim)))
            lhs = (np.sum(np.abs(total) ** p) * vol) ** (1 / p)
            rhs = np.sum((np.abs(coef) * bnorm[members]) ** s) ** (1 / s)
            rhs *= 2.0 ** (2 * mu * sh / s)
            best = max(best, lhs / rhs)
        rows.append({"shell": int(sh), "count": int(len(members)), "max_ratio": float(best)})
    return rows, bank.overlap


def _grid_probe(grid: LightConeGrid, p, s, mu, trials, seed, ell, shape, width,
                chunk=8192):
    cone = lightcone(grid.n)
    rng = np.random.default_rng(seed)
    # |sum a_k E_k|^p carries frequencies up to p times the spread of the
    # centres, so the Riemann sum needs a finer step than the fields themselves
    space = make_grid(cone, 2.0 ** ell, shape, guard=max(2.0, p))
    x = space.points().reshape(-1, cone.dim)
    env = np.exp(-0.5 * np.sum(x ** 2, axis=1) / width ** 2)
    vol = space.cell_volume
    env_norm = (np.sum(env ** p) * vol) ** (1 / p)
    rows = []
    for j in range(1, grid.j_max + 1):
        centres = np.array([grid.point(ell, j, k) for k in range(len(grid.sphere_nets[j]))])
        coef = rng.standard_normal((len(centres), trials)) \
            + 1j * rng.standard_normal((len(centres), trials))
        coef[:, 0] = 1.0  # focusing configuration
        acc = np.zeros(trials)
        for s0 in range(0, len(x), chunk):
            waves = np.exp(1j * space.pairing * (x[s0:s0 + chunk] @ centres.T))
            total = (waves @ coef) * env[s0:s0 + chunk, None]
            acc += np.sum(np.abs(total) ** p, axis=0)
        lhs = (acc * vol) ** (1 / p)
        rhs = env_norm * np.sum(np.abs(coef) ** s, axis=0) ** (1 / s) * 2.0 ** (2 * mu * j / s)
        rows.append({"shell": j, "count": int(len(centres)), "max_ratio": float(np.max(lhs / rhs))})
    # spectral blur of the envelope against the cell thickness of each shell
    blur = 1.0 / (space.pairing * width)
    thickness = {str(j): 2.0 ** ell * 2.0 ** (-2 * j) / 2 for j in range(1, grid.j_max + 1)}
    notes = {"envelope_width": width, "spectral_blur": blur, "grid_shape": list(space.shape),
             "cell_thickness": thickness, "localized": bool(blur <= min(thickness.values()))}
    return rows, notes


def lp_constant_probe(source, p: float, s: float, mu: float = 0.0, trials: int = 100,
                      seed: int = 0, ell: int = 0, shape=64, width: float = 3.0
                      ) -> ConstantProbeReport:
    """Empirical constant in ``||sum_j f_j||_p <= C (sum_j ||f_j||_p^s)^{1/s}``.

    ``source`` is a :class:`FilterBank` (blocks ``f_j`` are translated,
    randomly weighted copies of ``psi_j``; shells are dyadic in the trace) or
    a :class:`LightConeGrid` (wave packets at the grid points of each
    ``j``-shell at height ``2^ell`` under a common Gaussian envelope).  The
    first trial uses equal coefficients, which is the focusing configuration.
    The right-hand side carries the factor ``2^{2 mu j / s}``.

    Wave packets have spectral blur ``1 / (2 width)``, which exceeds the cell
    thickness ``2^{ell - 2j - 1}`` for all but the coarsest shells on desk
    grids.  The report flags this as ``notes["localized"] = False`` and then
    makes no boundedness claim.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    p_dual = p / (p - 1) if p > 1 else np.inf
    guaranteed = bool(abs(s - min(p, p_dual)) < 1e-12 and mu == 0)
    if isinstance(source, FilterBank):
        rows, overlap = _bank_probe(source, p, s, mu, trials, seed)
        mode, notes = "bank", {}
    elif isinstance(source, LightConeGrid):
        rows, notes = _grid_probe(source, p, s, mu, trials, seed, ell, shape, width)
        overlap, mode = None, "lightcone-grid"
    else:
        raise TypeError("source must be a FilterBank or a LightConeGrid")
    slope = _fit_slope([r["shell"] for r in rows], [r["max_ratio"] for r in rows])
    # the bound only applies when the pieces really sit in their cells
    localized = notes.get("localized", True)
    bounded = bool(slope < 0.05) if guaranteed and localized else None
    return ConstantProbeReport(p, s, mu, trials, rows, slope, overlap, guaranteed, bounded,
                               mode, notes)
