"""Separated lattices and Whitney decompositions of a symmetric cone.

A ``(delta, R)``-lattice is a family of points pairwise at invariant
distance at least ``2 delta`` whose ``R delta``-balls cover the cone.  We
build truncated lattices greedily on eigenvalue shells, verify them by
sampling, and also provide the explicit dyadic grid of the light cone.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import geometry as geo
from .jordan import ConeDescriptor, ConeDomainError, parse_cone

__all__ = [
    "ShellRegion",
    "Lattice",
    "LatticeReport",
    "generate_lattice",
    "verify_lattice",
    "dual_lattice",
    "whitney_assign",
    "sample_region",
    "shell_box",
    "LightConeGrid",
    "NestingReport",
    "lightcone_grid",
    "whitney_cell_contains",
    "verify_nesting",
    "sphere_net",
]


@dataclass(frozen=True)
class ShellRegion:
    """Points whose eigenvalues all lie in ``(lo, hi)``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0 < self.lo < self.hi < np.inf):
            raise ConeDomainError(
                f"shell region needs 0 < lo < hi < inf, got ({self.lo}, {self.hi})"
            )

    def contains(self, cone: ConeDescriptor, x) -> np.ndarray:
        lam, _ = cone.spectral(x)
        return (lam[..., 0] > self.lo) & (lam[..., -1] < self.hi)

    def to_dict(self):
        return {"kind": "shell", "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_dict(cls, d):
        if d.get("kind", "shell") != "shell":
            raise ValueError(f"unsupported region kind {d.get('kind')!r}")
        return cls(float(d["lo"]), float(d["hi"]))


def shell_box(cone: ConeDescriptor, region: ShellRegion):
    """Coordinate box ``(center, half_widths)`` containing the shell."""
    lo, hi = region.lo, region.hi
    if cone.kind == "lightcone":
        # eigenvalues x_1 -+ |x'| in (lo, hi)
        half = np.full(cone.dim, 0.5 * (hi - lo))
        center = np.zeros(cone.dim)
        center[0] = 0.5 * (hi + lo)
        return center, half
    r = cone.size
    center = np.concatenate([np.full(r, 0.5 * (hi + lo)), np.zeros(cone.dim - r)])
    # |X_ij| <= (lambda_max - lambda_min) / 2, packed with a factor sqrt(2)
    half = np.concatenate([np.full(r, 0.5 * (hi - lo)), np.full(cone.dim - r, (hi - lo) / np.sqrt(2))])
    return center, half


@dataclass
class Lattice:
    """Truncated lattice: points ``(N, n)``, parameters and its region."""

    cone: ConeDescriptor
    points: np.ndarray
    delta: float
    R: float
    region: ShellRegion
    overlap_bound: int | None = None
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    @property
    def transporters(self):
        """Self-adjoint ``g_j`` with ``g_j e = xi_j``."""
        return [geo.transporter(self.cone, p) for p in self.points]

    @property
    def radius(self) -> float:
        return self.R * self.delta

    def to_json(self) -> str:
        return json.dumps({
            "cone": self.cone.name,
            "delta": self.delta,
            "R": self.R,
            "points": self.points.tolist(),
            "region": self.region.to_dict(),
        })

    @classmethod
    def from_json(cls, text: str) -> "Lattice":
        d = json.loads(text)
        cone = parse_cone(d["cone"])
        pts = np.asarray(d["points"], dtype=float).reshape(-1, cone.dim)
        return cls(cone, pts, float(d["delta"]), float(d["R"]),
                   ShellRegion.from_dict(d["region"]))

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "Lattice":
        with open(path) as fh:
            return cls.from_json(fh.read())


@dataclass
class LatticeReport:
    n_points: int
    min_distance: float
    separation_ok: bool
    samples: int
    covering_failures: int
    overlap: int
    gamma: float
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.separation_ok and self.covering_failures == 0

    def to_dict(self):
        return {
            "n_points": self.n_points,
            "min_distance": self.min_distance,
            "separation_ok": self.separation_ok,
            "samples": self.samples,
            "covering_failures": self.covering_failures,
            "overlap": self.overlap,
            "gamma": self.gamma,
            "warnings": list(self.warnings),
            "ok": self.ok,
        }


# ---------------------------------------------------------------------------
# sampling in eigenvalue-and-angle coordinates
# ---------------------------------------------------------------------------

def _frame_points(cone: ConeDescriptor, lam, gauss):
    """Points with eigenvalues ``lam`` and frame built from normal draws."""
    if cone.kind == "lightcone":
        w = gauss[:, : cone.dim - 1]
        w = w / np.linalg.norm(w, axis=1, keepdims=True)
        first = 0.5 * (lam[:, 0] + lam[:, 1])
        rest = 0.5 * (lam[:, 1] - lam[:, 0])[:, None] * w
        return np.concatenate([first[:, None], rest], axis=1)
    r = cone.size
    G = gauss[:, : r * r].reshape(-1, r, r)
    Q, Rm = np.linalg.qr(G)
    Q = Q * np.sign(np.diagonal(Rm, axis1=1, axis2=2))[:, None, :]
    return cone.from_matrix((Q * lam[:, None, :]) @ np.swapaxes(Q, 1, 2))


def _angle_dims(cone: ConeDescriptor) -> int:
    if cone.kind == "lightcone":
        return cone.dim - 1
    return cone.size * cone.size if cone.size > 1 else 0


def sample_region(cone: ConeDescriptor, region: ShellRegion, size: int, rng=None,
                  quasi: bool = False, seed: int = 0):
    """Points of the shell: log-uniform eigenvalues, Haar-random frame."""
    k = cone.rank + _angle_dims(cone)
    if quasi:
        u = qmc.Halton(d=k, scramble=True, seed=seed).random(size)
    else:
        rng = np.random.default_rng(seed) if rng is None else rng
        u = rng.uniform(size=(size, k))
    u = np.clip(u, 1e-12, 1 - 1e-12)
    a, b = np.log(region.lo), np.log(region.hi)
    lam = np.sort(np.exp(a + (b - a) * u[:, : cone.rank]), axis=1)
    if k == cone.rank:
        return lam.copy()
    from scipy.special import ndtri

    return _frame_points(cone, lam, ndtri(u[:, cone.rank:]))


# ---------------------------------------------------------------------------
# construction and verification
# ---------------------------------------------------------------------------

def _greedy(cone, accepted, candidates, min_dist, chunk=8192):
    """Append candidates at distance >= ``min_dist`` from everything accepted.

    Candidates already within ``min_dist`` of the current set are screened
    out in bulk; only the survivors are walked one by one.
    """
    arr = np.asarray(accepted, dtype=float).reshape(-1, cone.dim)
    added = 0
    for s in range(0, len(candidates), chunk):
        blk = candidates[s:s + chunk]
        if len(arr):
            d = geo.distance(cone, blk[:, None, :], arr[None, :, :])
            blk = blk[d.min(axis=1) >= min_dist]
        for c in blk:
            if len(arr) and np.min(geo.distance(cone, arr, c)) < min_dist:
                continue
            arr = np.vstack([arr, c[None, :]])
            added += 1
    return arr, added


def generate_lattice(cone: ConeDescriptor, region: ShellRegion, delta: float = 0.5,
                     R: float = 2.0, seed: int = 0, candidates: int = 100_000,
                     max_sweeps: int = 50, quiet_sweeps: int = 4,
                     order: str = "shuffled") -> Lattice:
    """Greedy maximal ``2 delta``-separated set on a shell.

    Candidates come from scrambled Halton nets in eigenvalue-and-angle
    coordinates.  Each sweep uses a fresh net; construction stops once
    ``quiet_sweeps`` consecutive sweeps add no point.

    Parameters
    ----------
    order : {"shuffled", "sorted"}
        Candidate order within a sweep.  "sorted" walks the net in
        lexicographic eigenvalue order (useful in rank one).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if R < 2:
        raise ValueError("R must be at least 2 for a maximal separated set to cover")
    if not isinstance(region, ShellRegion):
        region = ShellRegion(*region)
    rng = np.random.default_rng(seed)
    pts = np.empty((0, cone.dim))
    history = []
    quiet = 0
    for sweep in range(max_sweeps):
        cand = sample_region(cone, region, candidates, quasi=True,
                             seed=int(rng.integers(2**31)))
        if order == "sorted":
            lam, _ = cone.spectral(cand)
            cand = cand[np.lexsort(lam.T[::-1])]
        else:
            cand = cand[rng.permutation(len(cand))]
        pts, added = _greedy(cone, pts, cand, 2 * delta)
        history.append(added)
        quiet = quiet + 1 if added == 0 else 0
        if quiet >= quiet_sweeps:
            break
    info = {"sweeps": history, "candidates_per_sweep": candidates}
    if quiet < quiet_sweeps:
        info["warning"] = "candidate sweeps still adding points; net too coarse"
        warnings.warn(info["warning"])
    return Lattice(cone, pts, float(delta), float(R), region, info=info)


def _chunked_ball_counts(cone, points, radius, samples, chunk=4096):
    """For each sample: number of covering balls and index of the first."""
    counts = np.empty(len(samples), dtype=int)
    first = np.empty(len(samples), dtype=int)
    for s in range(0, len(samples), chunk):
        blk = samples[s:s + chunk]
        d = geo.distance(cone, blk[:, None, :], points[None, :, :])
        inside = d < radius
        counts[s:s + chunk] = inside.sum(axis=1)
        first[s:s + chunk] = np.where(inside.any(axis=1), inside.argmax(axis=1), -1)
    return counts, first


def whitney_assign(lat: Lattice, samples) -> np.ndarray:
    """Index ``j`` of the Whitney cell ``E_j = B_j minus earlier cells``.

    ``-1`` marks points outside every ball.
    """
    _, first = _chunked_ball_counts(lat.cone, lat.points, lat.radius,
                                    np.asarray(samples, dtype=float))
    return first


def verify_lattice(lat: Lattice, samples: int = 100_000, seed: int = 1,
                   gamma_samples: int = 2000) -> LatticeReport:
    """Sampled check of separation, covering, overlap and the minor ratio."""
    cone = lat.cone
    warn = []
    if len(lat) > 1:
        D = geo.pairwise_distance(cone, lat.points, lat.points)
        np.fill_diagonal(D, np.inf)
        min_d = float(D.min())
    else:
        min_d = float("inf")
    sep_ok = min_d >= 2 * lat.delta - 1e-9
    rng = np.random.default_rng(seed)
    pts = sample_region(cone, lat.region, samples, rng=rng)
    counts, first = _chunked_ball_counts(cone, lat.points, lat.radius, pts)
    failures = int(np.sum(counts == 0))
    overlap = int(counts.max()) if len(counts) else 0
    # minor ratio between sampled ball points and their centre
    sub = pts[:gamma_samples]
    j = first[:gamma_samples]
    ok = j >= 0
    if np.any(ok):
        ratio = cone.minors(sub[ok]) / cone.minors(lat.points[j[ok]])
        gamma = float(np.max(np.maximum(ratio, 1 / ratio)))
    else:
        gamma = float("nan")
    if "warning" in lat.info:
        warn.append(lat.info["warning"])
    return LatticeReport(len(lat), min_d, bool(sep_ok), samples, failures, overlap, gamma, warn)


def dual_lattice(lat: Lattice) -> Lattice:
    """Lattice of inverses; inversion is an isometry so ``(delta, R)`` carry over."""
    cone = lat.cone
    cone.check_interior(lat.points)
    inv = cone.inverse(lat.points)
    region = ShellRegion(1.0 / lat.region.hi, 1.0 / lat.region.lo)
    return Lattice(cone, inv, lat.delta, lat.R, region, lat.overlap_bound,
                   info={"dual_of": lat.info})


# ---------------------------------------------------------------------------
# explicit light-cone grid
# ---------------------------------------------------------------------------

def _van_der_corput(count: int) -> np.ndarray:
    i = np.arange(count)
    out = np.zeros(count)
    denom = 1.0
    while np.any(i):
        denom *= 2.0
        out += (i & 1) / denom
        i >>= 1
    return out


def sphere_net(dim: int, sep: float, seed: int = 0, oversample: int = 64) -> np.ndarray:
    """Maximal ``sep``-separated (chordal) set on the unit sphere of R^dim.

    On the circle the fine net is walked in van der Corput order; in higher
    dimension a seeded Halton net is walked in random order.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        count = 1
        while 2 * np.pi / count > sep / 8:
            count *= 2
        t = 2 * np.pi * _van_der_corput(count)
        cand = np.stack([np.cos(t), np.sin(t)], axis=1)
    else:
        from scipy.special import ndtri

        count = int(oversample * max(1.0, (2.0 / sep)) ** (dim - 1))
        u = qmc.Halton(d=dim, scramble=True, seed=seed).random(count)
        cand = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        cand = cand[np.random.default_rng(seed).permutation(count)]
    arr = _greedy_sphere(cand[:1], cand[1:], sep)
    if dim > 2:
        # fresh random candidates fill the gaps the first net left
        rng = np.random.default_rng([seed, 1])
        quiet = 0
        while quiet < 2:
            extra = rng.standard_normal((count, dim))
            extra /= np.linalg.norm(extra, axis=1, keepdims=True)
            grown = _greedy_sphere(arr, extra, sep)
            quiet = quiet + 1 if len(grown) == len(arr) else 0
            arr = grown
        arr = _fill_sphere_holes(arr, sep)
    return arr


def _fill_sphere_holes(arr, sep, max_rounds=100):
    """Add the deepest uncovered points until the covering radius is below ``sep``.

    The farthest point of the sphere from a finite set is a vertex of its
    spherical Voronoi diagram, i.e. the outward normal of a facet of the
    convex hull (both orientations are tried in case the origin is outside).
    """
    from scipy.spatial import ConvexHull, QhullError

    for _ in range(max_rounds):
        try:
            hull = ConvexHull(arr)
        except QhullError:
            return arr
        normals = hull.equations[:, :-1]
        normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
        cand = np.concatenate([normals, -normals])
        depth = np.linalg.norm(cand[:, None] - arr[None], axis=-1).min(axis=1)
        order = np.argsort(-depth)
        order = order[depth[order] >= sep]
        if not len(order):
            return arr
        arr = _greedy_sphere(arr, cand[order], sep)
    return arr


def _greedy_sphere(arr, cand, sep, chunk=4096):
    for s in range(0, len(cand), chunk):
        blk = cand[s:s + chunk]
        far = np.linalg.norm(blk[:, None] - arr[None], axis=-1).min(axis=1) >= sep
        for c in blk[far]:
            if np.min(np.linalg.norm(arr - c, axis=1)) >= sep:
                arr = np.vstack([arr, c])
    return arr


@dataclass
class LightConeGrid:
    n: int
    ell_range: tuple
    j_max: int
    sphere_nets: dict
    delta_sector: float = 2.0

    @property
    def counts(self) -> dict:
        return {j: len(w) for j, w in self.sphere_nets.items()}

    def point(self, ell: int, j: int, k: int) -> np.ndarray:
        self._check(ell, j, k)
        w = self.sphere_nets[j][k]
        s = np.sqrt(1.0 - 2.0 ** (-2 * j))
        return 2.0 ** ell * np.concatenate([[1.0], s * w])

    def points(self):
        """All ``(ell, j, k, xi)`` tuples."""
        out = []
        for ell in range(self.ell_range[0], self.ell_range[1] + 1):
            for j in range(1, self.j_max + 1):
                for k in range(len(self.sphere_nets[j])):
                    out.append((ell, j, k, self.point(ell, j, k)))
        return out

    def _check(self, ell, j, k):
        if not (self.ell_range[0] <= ell <= self.ell_range[1]):
            raise IndexError(f"ell={ell} outside {self.ell_range}")
        if not (1 <= j <= self.j_max):
            raise IndexError(f"j={j} outside 1..{self.j_max}")
        if not (0 <= k < len(self.sphere_nets[j])):
            raise IndexError(f"k={k} outside 0..{len(self.sphere_nets[j]) - 1}")

    def to_dict(self):
        return {
            "n": self.n,
            "ell_range": list(self.ell_range),
            "j_max": self.j_max,
            "delta_sector": self.delta_sector,
            "sphere_nets": {str(j): w.tolist() for j, w in self.sphere_nets.items()},
            "counts": {str(j): c for j, c in self.counts.items()},
        }


def lightcone_grid(n: int, ell_range=(0, 0), j_max: int = 3, delta_sector: float = 2.0,
                   seed: int = 0) -> LightConeGrid:
    """Dyadic grid ``(2^l, 2^l sqrt(1 - 4^{-j}) w_k)`` of the light cone."""
    if n < 3:
        raise ValueError("light cone grid needs n >= 3")
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    lo, hi = int(ell_range[0]), int(ell_range[1])
    if lo > hi:
        raise ValueError("empty ell range")
    nets = {j: sphere_net(n - 1, 2.0 ** (-j), seed=seed + j) for j in range(1, j_max + 1)}
    return LightConeGrid(n, (lo, hi), int(j_max), nets, float(delta_sector))


def whitney_cell_contains(grid: LightConeGrid, ell: int, j: int, k: int, xi) -> np.ndarray:
    """Membership in the truncated conical sector ``E^l_{j,k}``."""
    grid._check(ell, j, k)
    xi = np.asarray(xi, dtype=float)
    tau = xi[..., 0]
    xp = xi[..., 1:]
    rho = np.linalg.norm(xp, axis=-1)
    height = (tau > 2.0 ** (ell - 1)) & (tau < 2.0 ** (ell + 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        thick = 1.0 - (rho / tau) ** 2
        direction = np.where(rho[..., None] > 0, xp / np.where(rho > 0, rho, 1)[..., None], 0)
    band = (thick > 2.0 ** (-2 * j - 2)) & (thick < 2.0 ** (-2 * j + 2))
    w = grid.sphere_nets[j][k]
    sector = np.linalg.norm(direction - w, axis=-1) <= grid.delta_sector * 2.0 ** (-j)
    return height & band & sector


@dataclass
class NestingReport:
    eta_outer: dict  # (ell, j) -> sup distance from centre to sampled cell points
    eta_inner: dict  # (ell, j) -> in-radius estimate
    eta1: float
    eta2: float
    scale_spread: float  # relative spread of eta estimates across ell
    j_ratio: float  # eta_outer(j=1) / eta_outer(j_max) (max over ell)

    def to_dict(self):
        key = lambda t: f"{t[0]},{t[1]}"
        return {
            "eta_outer": {key(k): v for k, v in self.eta_outer.items()},
            "eta_inner": {key(k): v for k, v in self.eta_inner.items()},
            "eta1": self.eta1,
            "eta2": self.eta2,
            "scale_spread": self.scale_spread,
            "j_ratio": self.j_ratio,
        }


def _cell_samples(grid, ell, j, k, size, rng):
    """Rejection samples of ``E^l_{j,k}`` in (height, thickness, direction)."""
    n = grid.n
    out = []
    need = size
    w = grid.sphere_nets[j][k]
    while need > 0:
        m = 4 * need + 64
        tau = 2.0 ** ell * np.exp(rng.uniform(np.log(0.5), np.log(2.0), m))
        th = np.exp(rng.uniform(np.log(2.0 ** (-2 * j - 2)), np.log(min(1.0, 2.0 ** (-2 * j + 2))), m))
        rho = tau * np.sqrt(1.0 - th)
        # directions near w: perturb and normalise
        v = w + grid.delta_sector * 2.0 ** (-j) * rng.uniform(-1, 1, (m, n - 1))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        xi = np.concatenate([tau[:, None], rho[:, None] * v], axis=1)
        keep = whitney_cell_contains(grid, ell, j, k, xi)
        xi = xi[keep][:need]
        out.append(xi)
        need -= len(xi)
    return np.concatenate(out)


def _exit_radius(grid, cone, ell, j, k, c, rng, directions, rmax, steps=64, bisections=40):
    """Smallest distance along geodesic rays ``g exp(t u)`` at which the cell is left."""
    g = geo.transporter(cone, c)
    u = rng.standard_normal((directions, cone.dim))
    u /= cone.norm(u)[:, None]

    def inside(t):
        z = cone.spectral_map(t[..., None] * u, np.exp)
        return whitney_cell_contains(grid, ell, j, k, g.apply(z))

    ts = np.linspace(0.0, rmax, steps + 1)[1:]
    first_out = np.full(directions, -1)
    for i, t in enumerate(ts):
        out = ~inside(np.full(directions, t)) & (first_out < 0)
        first_out[out] = i
    hit = first_out >= 0
    if not np.any(hit):
        return np.inf
    u = u[hit]
    directions = len(u)
    hi = ts[first_out[hit]]
    lo = np.where(first_out[hit] > 0, ts[np.maximum(first_out[hit] - 1, 0)], 0.0)
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        ins = inside(mid)
        lo = np.where(ins, mid, lo)
        hi = np.where(ins, hi, mid)
    return float(hi.min())


def verify_nesting(grid: LightConeGrid, samples: int = 2000, seed: int = 0,
                   directions: int = 500) -> NestingReport:
    """Estimate radii with ``B_eta1(centre) in E in B_eta2(centre)`` per cell.

    The outer radius is the largest distance over ``samples`` cell points;
    the inner one is the first exit along ``directions`` geodesic rays.
    Each ``(ell, j, k)`` draws its own samples, so the spread across ``ell``
    measures dilation invariance up to sampling noise.
    """
    cone_dim = grid.n
    from .jordan import lightcone

    cone = lightcone(cone_dim)
    outer, inner = {}, {}
    for ell in range(grid.ell_range[0], grid.ell_range[1] + 1):
        for j in range(1, grid.j_max + 1):
            o_best, i_best = 0.0, np.inf
            for k in range(len(grid.sphere_nets[j])):
                rng = np.random.default_rng([seed, ell - grid.ell_range[0], j, k])
                c = grid.point(ell, j, k)
                pts = _cell_samples(grid, ell, j, k, samples, rng)
                o_best = max(o_best, float(geo.distance(cone, c, pts).max()))
                i_best = min(i_best, _exit_radius(grid, cone, ell, j, k, c, rng, directions,
                                                  1.5 * o_best))
            outer[(ell, j)] = o_best
            inner[(ell, j)] = i_best
    eta2 = max(outer.values())
    eta1 = min(inner.values())
    spread = 0.0
    for j in range(1, grid.j_max + 1):
        vals = np.array([outer[(l, j)] for l in range(grid.ell_range[0], grid.ell_range[1] + 1)])
        ivals = np.array([inner[(l, j)] for l in range(grid.ell_range[0], grid.ell_range[1] + 1)])
        spread = max(spread, float(np.ptp(vals) / vals.max()), float(np.ptp(ivals) / ivals.max()))
    j_ratio = max(outer[(l, 1)] / outer[(l, grid.j_max)]
                  for l in range(grid.ell_range[0], grid.ell_range[1] + 1))
    return NestingReport(outer, inner, eta1, eta2, spread, j_ratio)
