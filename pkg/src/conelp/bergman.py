"""Tube domains over the cone: Bergman kernels, Fourier-Laplace extensions,
mixed norms and the boundedness region of weighted Bergman projectors.

Critical indices are computed in exact rational arithmetic whenever the
inputs are rational (ints, Fractions or decimal floats); infinite values are
``math.inf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .jordan import ConeDescriptor, ConeDomainError, lightcone
from .lp import GridField
from .quadrature import QuadratureSpec, divergence_probe, gamma_omega, integrate_cone

__all__ = [
    "TubePoint",
    "CriticalIndices",
    "critical_indices",
    "dual_exponent",
    "RegionVerdict",
    "REASONS",
    "classify_region",
    "region_rows",
    "region_csv",
    "region_svg",
    "log_det_tube",
    "bergman_kernel",
    "bergman_kernel_quad",
    "kernel_constant_ratio",
    "fourier_laplace",
    "fourier_laplace_slice",
    "cauchy_riemann_residual",
    "decay_scan",
    "mixed_norm",
    "kernel_membership",
    "kernel_membership_oracle",
    "counterexample_witness",
]

INF = math.inf

# stable reason tags (downstream tools key on these strings)
REASONS = {
    "kernel-not-in-dual": "kernel B(.+ie) outside the dual mixed-norm space",
    "bounded-band": "q strictly between q'_{nu,p} and q_{nu,p}",
    "unbounded-small-p": "p <= 2 and q outside (q'_{nu,p}, q_{nu,p})",
    "unbounded-large-p": "p > 2 and q >= min(2 q_nu, q_tilde) or its dual",
    "bilinear-extension": "n=3, r=2, p=4 extension up to (4/3 + 1/24) q_nu",
    "open": "not decided by the available criteria",
}


def _exact(x):
    """Rational value of ``x`` (decimal reading of floats); ``inf`` stays."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    x = float(x)
    if math.isinf(x):
        return INF
    return Fraction(repr(x))


def dual_exponent(p):
    """``p' = p / (p - 1)`` with ``1' = inf`` and ``inf' = 1``."""
    p = _exact(p)
    if p == INF:
        return Fraction(1)
    if p == 1:
        return INF
    if p < 1:
        raise ValueError("exponent must be >= 1")
    return p / (p - 1)


# ---------------------------------------------------------------------------
# tube points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TubePoint:
    """``z = x + i y`` with ``y`` in the open cone."""

    x: np.ndarray
    y: np.ndarray
    cone: ConeDescriptor

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.x.shape != (self.cone.dim,) or self.y.shape != (self.cone.dim,):
            raise ValueError("tube point coordinates must match the cone dimension")
        self.cone.check_interior(self.y)

    @property
    def z(self) -> np.ndarray:
        return self.x + 1j * self.y

    @classmethod
    def imaginary(cls, cone: ConeDescriptor, y) -> "TubePoint":
        return cls(np.zeros(cone.dim), y, cone)


# ---------------------------------------------------------------------------
# critical indices and the boundedness region
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalIndices:
    q_nu: object
    q_nu_p: object
    q_tilde: object

    def to_dict(self):
        def enc(v):
            return "inf" if v == INF else (str(v) if isinstance(v, Fraction) and v.denominator != 1
                                           else int(v) if isinstance(v, Fraction) else v)
        return {"q_nu": enc(self.q_nu), "q_nu_p": enc(self.q_nu_p), "q_tilde": enc(self.q_tilde)}


def _check_nu(n, r, nu):
    nr = Fraction(n) / Fraction(r)
    if not nu > nr - 1:
        raise ConeDomainError(f"nu = {nu} must exceed n/r - 1 = {nr - 1}")
    return nr


def critical_indices(n: int, r: int, nu, p) -> CriticalIndices:
    """``q_nu``, ``q_{nu,p}`` and ``q~_{nu,p}``.

    ``q_nu = (nu + n/r - 1) / (n/r - 1)``, ``q_{nu,p} = min(p, p') q_nu`` and
    ``q~_{nu,p} = (nu + n/r - 1) / ((n/r)/p' - 1)`` (infinite when
    ``n/r <= p'``).  In rank one all three are infinite.
    """
    nu, p = _exact(nu), _exact(p)
    nr = _check_nu(n, r, nu)
    if p == INF or p < 1:
        raise ValueError("need 1 <= p < inf")
    if r == 1 or nr == 1:
        return CriticalIndices(INF, INF, INF)
    q_nu = (nu + nr - 1) / (nr - 1)
    pd = dual_exponent(p)
    q_nu_p = min(p, pd) * q_nu
    inv_pd = 0 if pd == INF else 1 / pd
    den = nr * inv_pd - 1
    q_tilde = (nu + nr - 1) / den if den > 0 else INF
    return CriticalIndices(q_nu, q_nu_p, q_tilde)


@dataclass(frozen=True)
class RegionVerdict:
    verdict: str  # Bounded | Unbounded | Open
    reason: str
    appendix_extension_used: bool = False

    def to_dict(self):
        return {"verdict": self.verdict, "reason": self.reason,
                "appendix_extension_used": self.appendix_extension_used}


def _mul(a, b):
    return INF if INF in (a, b) else a * b


def classify_region(n: int, r: int, nu, p, q, use_appendix: bool = False) -> RegionVerdict:
    """Boundedness of the weighted Bergman projector on the mixed-norm space.

    Decision order: kernel test, bounded band, the two unbounded criteria,
    the optional ``n=3, r=2, p=4`` extension, otherwise Open.  ``q = q~``
    counts as Unbounded.
    """
    q = _exact(q)
    if q != INF and q < 1:
        raise ValueError("need q >= 1")
    idx = critical_indices(n, r, nu, p)
    nu, p = _exact(nu), _exact(p)
    qd = dual_exponent(q)
    qt, qtd = idx.q_tilde, dual_exponent(idx.q_tilde)
    if q >= qt or q <= qtd:
        return RegionVerdict("Unbounded", "kernel-not-in-dual")
    qp, qpd = idx.q_nu_p, dual_exponent(idx.q_nu_p)
    if qpd < q < qp:
        return RegionVerdict("Bounded", "bounded-band")
    if p <= 2:
        return RegionVerdict("Unbounded", "unbounded-small-p")
    top = min(_mul(2, idx.q_nu), qt)
    if q >= top or q <= dual_exponent(top):
        return RegionVerdict("Unbounded", "unbounded-large-p")
    if use_appendix and (n, r) == (3, 2) and p == 4 and nu > Fraction(1, 2) + Fraction(5, 11):
        limit = (Fraction(4, 3) + Fraction(1, 24)) * idx.q_nu
        if 2 <= q < limit or 2 <= qd < limit:
            return RegionVerdict("Bounded", "bilinear-extension", True)
    return RegionVerdict("Open", "open")


def region_rows(n: int, r: int, nu, steps: int = 48, use_appendix: bool = False) -> list:
    """Verdicts on the grid ``1/p = i/steps`` (``i >= 1``), ``1/q = k/steps``."""
    rows = []
    for i in range(1, steps + 1):
        inv_p = Fraction(i, steps)
        for k in range(0, steps + 1):
            inv_q = Fraction(k, steps)
            q = INF if k == 0 else 1 / inv_q
            v = classify_region(n, r, nu, 1 / inv_p, q, use_appendix)
            rows.append((inv_q, inv_p, v.verdict, v.reason))
    return rows


def region_csv(rows) -> str:
    out = ["inv_q,inv_p,verdict,reason"]
    for inv_q, inv_p, verdict, reason in rows:
        out.append(f"{float(inv_q):.17g},{float(inv_p):.17g},{verdict},{reason}")
    return "\n".join(out) + "\n"


def region_svg(n: int, r: int, nu, steps: int = 48, use_appendix: bool = False,
               size: int = 400) -> str:
    """SVG of the ``(1/p, 1/q)`` square: Bounded shaded, Open hatched, with the
    hexagon bounding the bounded band drawn on top."""
    rows = region_rows(n, r, nu, steps, use_appendix)
    pad = 40
    cell = size / steps
    colors = {"Bounded": "#4a7bb7", "Open": "#f2c14e", "Unbounded": "#ffffff"}

    def px(u):
        return pad + float(u) * size

    def py(v):
        return pad + (1.0 - float(v)) * size

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 2 * pad}" '
        f'height="{size + 2 * pad}" viewBox="0 0 {size + 2 * pad} {size + 2 * pad}">',
        f'<rect x="0" y="0" width="{size + 2 * pad}" height="{size + 2 * pad}" fill="white"/>',
    ]
    for inv_q, inv_p, verdict, _ in rows:
        x0 = px(inv_p) - cell / 2
        y0 = py(inv_q) - cell / 2
        parts.append(f'<rect x="{x0:.3f}" y="{y0:.3f}" width="{cell:.3f}" height="{cell:.3f}" '
                     f'fill="{colors[verdict]}" stroke="none"/>')
    idx_half = critical_indices(n, r, nu, 2)
    if idx_half.q_nu != INF:
        qn = float(idx_half.q_nu)
        hexagon = [(0, 1 / qn), (0.5, 1 / (2 * qn)), (1, 1 / qn),
                   (1, 1 - 1 / qn), (0.5, 1 - 1 / (2 * qn)), (0, 1 - 1 / qn)]
        pts = " ".join(f"{px(u):.3f},{py(v):.3f}" for u, v in hexagon)
        parts.append(f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>')
    parts += [
        f'<rect x="{pad}" y="{pad}" width="{size}" height="{size}" fill="none" stroke="black"/>',
        f'<text x="{pad + size / 2}" y="{size + 2 * pad - 8}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">1/p</text>',
        f'<text x="12" y="{pad + size / 2}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14" transform="rotate(-90 12 {pad + size / 2})">1/q</text>',
        f'<text x="{pad}" y="{pad - 12}" font-family="sans-serif" font-size="12">'
        f'n={n}, r={r}, nu={nu}</text>',
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# Bergman kernel
# ---------------------------------------------------------------------------

def log_det_tube(cone: ConeDescriptor, u) -> np.ndarray:
    """``log Delta(u)`` as the sum of principal logs of successive minor ratios."""
    m = cone.minors(np.asarray(u, dtype=complex))
    prev = np.concatenate([np.ones_like(m[..., :1]), m[..., :-1]], axis=-1)
    return np.sum(np.log(m / prev), axis=-1)


def _kernel_argument(z: TubePoint, w: TubePoint) -> np.ndarray:
    # (z - conj(w)) / i = (y_z + y_w) - i (x_z - x_w)
    return (z.y + w.y) - 1j * (z.x - w.x)


def kernel_constant_ratio(cone: ConeDescriptor, nu) -> float:
    """``d(nu) / c_nu = Gamma_Omega(nu + n/r)``."""
    nu = float(nu)
    if not nu > cone.n_over_r - 1:
        raise ConeDomainError(f"nu = {nu} must exceed n/r - 1 = {cone.n_over_r - 1}")
    return gamma_omega(cone, nu + cone.n_over_r)


def bergman_kernel(cone: ConeDescriptor, nu, z: TubePoint, w: TubePoint,
                   c_nu: float = 1.0) -> complex:
    """``d(nu) Delta^{-(nu + n/r)}((z - conj w) / i)`` with ``d(nu) = c_nu Gamma_Omega(nu + n/r)``."""
    d = c_nu * kernel_constant_ratio(cone, nu)
    u = _kernel_argument(z, w)
    return complex(d * np.exp(-(float(nu) + cone.n_over_r) * log_det_tube(cone, u)))


def bergman_kernel_quad(cone: ConeDescriptor, nu, z: TubePoint, w: TubePoint,
                        c_nu: float = 1.0, spec: QuadratureSpec | None = None) -> complex:
    """``c_nu int exp(i (z - conj w | xi)) Delta(xi)^nu d xi`` by cone cubature.

    The damping ``exp(-(y_z + y_w | xi))`` is the rule's weight; the
    oscillation ``exp(-i (x_z - x_w | xi))`` is integrated as real and
    imaginary parts, on a denser default rule when the oscillation is present.
    """
    nu = float(nu)
    kernel_constant_ratio(cone, nu)
    u = _kernel_argument(z, w)
    Y, X = u.real, -u.imag
    c = 2.0 if cone.kind == "lightcone" else 1.0
    s = np.full(cone.rank, nu + cone.n_over_r)
    expo = s - np.concatenate([s[1:], [0.0]])
    expo[-1] -= cone.n_over_r

    def part(trig):
        def f(xi, m):
            with np.errstate(divide="ignore", invalid="ignore"):
                logv = np.log(m) @ expo - c * (xi @ Y)
            return np.exp(logv) * trig(c * (xi @ X))
        return f

    oscillating = not np.allclose(X, 0.0)
    if spec is None and oscillating and cone.rank <= 2:
        # the oscillation needs denser nodes than the bare damping weight
        spec = QuadratureSpec("gaussian", nodes=(128, 24))
    re = integrate_cone(cone, part(np.cos), spec, weight_point=Y, with_minors=True)
    if not oscillating:
        return complex(c_nu * re.value)
    im = integrate_cone(cone, part(np.sin), spec, weight_point=Y, with_minors=True)
    # exp(i(z - conj w | xi)) = exp(-(Y|xi)) exp(+i (X|xi))
    return complex(c_nu * (re.value + 1j * im.value))


# ---------------------------------------------------------------------------
# Fourier-Laplace extension
# ---------------------------------------------------------------------------

def _check_spectrum(spectrum: GridField):
    if spectrum.domain != "frequency":
        raise ValueError("expected a frequency field")
    mag = np.abs(spectrum.samples)
    occ = mag > 1e-13 * mag.max() if mag.max() > 0 else np.zeros(mag.shape, bool)
    xi = spectrum.points()
    inside = spectrum.cone.is_interior(xi)
    if np.any(occ & ~inside):
        raise ConeDomainError("spectrum is not supported in the open cone")
    return xi, occ


def fourier_laplace(spectrum: GridField, z: TubePoint) -> complex:
    """``F(z) = int exp(i (z|xi)) g(xi) d xi`` by the grid Riemann sum."""
    xi, occ = _check_spectrum(spectrum)
    c = spectrum.pairing
    phase = c * (xi[occ] @ z.x)
    damp = c * (xi[occ] @ z.y)
    vals = spectrum.samples[occ] * np.exp(1j * phase - damp)
    return complex(np.sum(vals) * spectrum.cell_volume)


def fourier_laplace_slice(spectrum: GridField, y) -> GridField:
    """``x -> F(x + i y)`` on the conjugate space grid (one inverse DFT)."""
    xi, occ = _check_spectrum(spectrum)
    y = np.asarray(y, dtype=float)
    spectrum.cone.check_interior(y)
    damped = np.where(occ, spectrum.samples * np.exp(-spectrum.pairing * (xi @ y)), 0.0)
    g = spectrum.copy(samples=damped)
    out = g.to_space()
    # the inverse transform carries (2 pi)^{-n}; F has none
    out.samples *= (2 * np.pi) ** spectrum.cone.dim
    return out


def cauchy_riemann_residual(spectrum: GridField, z: TubePoint, h: float = 1e-4) -> float:
    """``max_k |dF/dx_k + i dF/dy_k| / |grad F|`` by central differences."""
    cone = z.cone
    res, scale = 0.0, 0.0
    for k in range(cone.dim):
        e = np.zeros(cone.dim)
        e[k] = h
        dx = (fourier_laplace(spectrum, TubePoint(z.x + e, z.y, cone))
              - fourier_laplace(spectrum, TubePoint(z.x - e, z.y, cone))) / (2 * h)
        dy = (fourier_laplace(spectrum, TubePoint(z.x, z.y + e, cone))
              - fourier_laplace(spectrum, TubePoint(z.x, z.y - e, cone))) / (2 * h)
        res = max(res, abs(dx + 1j * dy))
        scale = max(scale, abs(dx), abs(dy))
    return res / scale if scale > 0 else 0.0


def decay_scan(spectrum: GridField, ts: Sequence[float]) -> dict:
    """``|F(i t e)|`` along the ray and its log-log slope over the scan."""
    cone = spectrum.cone
    ts = np.asarray(ts, dtype=float)
    vals = np.array([abs(fourier_laplace(spectrum, TubePoint.imaginary(cone, t * cone.identity)))
                     for t in ts])
    slope = float(np.polyfit(np.log(ts), np.log(vals), 1)[0])
    return {"t": ts.tolist(), "abs_F": vals.tolist(), "loglog_slope": slope}


# ---------------------------------------------------------------------------
# mixed norms
# ---------------------------------------------------------------------------

def mixed_norm(slices: Sequence[GridField], y_points, nu: float, p: float, q: float) -> float:
    """``(sum_j Delta(y_j)^nu ||F(. + i y_j)||_p^q)^{1/q}``."""
    from .lp import lp_norm

    slices = list(slices)
    y = np.asarray(getattr(y_points, "points", y_points), dtype=float)
    if len(slices) != len(y):
        raise ValueError("one slice per lattice point required")
    if not slices:
        return 0.0
    ref = slices[0]
    for s in slices[1:]:
        if s.shape != ref.shape or not np.allclose(s.spacing, ref.spacing) \
                or not np.allclose(s.origin, ref.origin):
            raise ValueError("slices must share one grid")
    cone = ref.cone
    terms = [cone.det(yj) ** nu * lp_norm(s, p) ** q for s, yj in zip(slices, y)]
    return float(math.fsum(terms) ** (1.0 / q))


# ---------------------------------------------------------------------------
# kernel membership and counterexamples
# ---------------------------------------------------------------------------

def kernel_membership(n: int, r: int, nu, p, q) -> bool:
    """Whether ``B_nu(. + i e)`` lies in the dual space ``L^{p', q'}_nu``: ``q < q~``."""
    return bool(_exact(q) < critical_indices(n, r, nu, p).q_tilde)


def _slice_power_check(n: int, s: float, ys, box: float = 24.0, shape: int = 96) -> dict:
    """Grid quadrature of ``int |Delta(Y - i x)|^{-s} dx`` against ``Delta(Y)^{n/2 - s}``."""
    cone = lightcone(n)
    h = 2 * box / shape
    ax = -box + h * (np.arange(shape) + 0.5)
    vals = []
    for Y in ys:
        acc = 0.0
        for x1 in ax:
            X = np.stack(np.meshgrid(*([ax] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1)
            pts = np.concatenate([np.full((len(X), 1), x1), X], axis=1)
            d = cone.det(np.asarray(Y) - 1j * pts)
            acc += np.sum(np.abs(d) ** (-s))
        vals.append(acc * h ** n * 2.0 ** (n / 2))
    vals = np.array(vals)
    pred = cone.det(np.asarray(ys)) ** (n / 2 - s)
    ratio = vals / pred
    return {"values": vals.tolist(), "ratio_to_power": ratio.tolist(),
            "ratio_spread": float(ratio.max() / ratio.min() - 1.0)}


def kernel_membership_oracle(n: int, r: int, nu, p, q, truncations=None,
                             slice_check: bool = True) -> dict:
    """Truncation oracle for :func:`kernel_membership` on the light cone.

    Each x-slice norm is a power of ``Delta(y + e)`` (checked by grid
    quadrature at a few ``y`` when ``slice_check``), which turns the mixed
    norm into the two-factor cone integral decided by the log-weighted probe.
    """
    if r != 2:
        raise NotImplementedError("oracle implemented for the light cone (rank two)")
    nu, p, q = float(nu), float(p), float(q)
    nr = n / r
    if not nu > nr - 1:
        raise ConeDomainError("nu must exceed n/r - 1")
    pd = float(dual_exponent(p)) if p > 1 else INF
    qd = float(dual_exponent(q)) if q > 1 else INF
    alpha = nu + nr
    slice_ok = alpha * pd > 2 * nr - 1
    out = {"closed_form": kernel_membership(n, r, nu, p, q), "slice_integrable": bool(slice_ok)}
    if not slice_ok:
        out["oracle"] = False
        return out
    if slice_check:
        ys = [np.eye(n)[0], np.array([2.0, 1.0] + [0.0] * (n - 2)), 3.0 * np.eye(n)[0]]
        out["slice_check"] = _slice_power_check(n, alpha * pd, ys)
    a_red = (alpha * pd - nr) * qd / pd
    b_red = nu - nr
    probe = divergence_probe("log2_lemma", {"alpha": a_red, "beta": b_red, "delta": 0.0,
                                            "n": n, "r": r}, truncations)
    out["y_integral"] = probe.to_dict()
    out["exponent_gap"] = a_red - b_red - (2 * nr - 1)
    out["oracle"] = probe.converges
    out["agrees"] = out["oracle"] == out["closed_form"]
    return out


@dataclass
class WitnessReport:
    n: int
    nu: float
    p: float
    q: float
    alpha: float
    log_exponent: float
    slice_probe: dict
    box_probe: dict
    verdicts: tuple
    steps: list = field(default_factory=list)

    def to_dict(self):
        return {"n": self.n, "nu": self.nu, "p": self.p, "q": self.q, "alpha": self.alpha,
                "log_exponent": self.log_exponent, "verdicts": list(self.verdicts),
                "slice_probe": self.slice_probe, "box_probe": self.box_probe,
                "steps": self.steps}


def counterexample_witness(n: int = 3, nu: float = 1.5, p: float = 2.0,
                           truncations=None, log_exponent: float | None = None,
                           alpha: float | None = None) -> WitnessReport:
    """Reduced integrals for ``F(z) = Delta((z+ie)/i)^{-alpha} (1 + log Delta((z+ie)/i))^{-k}``.

    Defaults ``alpha = (2n/r - 1)/p`` and ``k = 1/p`` on the light cone.
    (i) ``int |F(x + i e)|^p dx``: the x-integral leaves the cone integral
    with exponents ``p alpha`` and log power ``p k`` (Diverges for the
    defaults).  (ii) with ``q = p q_nu``, the y-integral of
    ``||Box F(. + i y)||_p^q Delta(y)^{nu + q - n/r}``: leading exponent
    ``((alpha + 1) p - n/r) q / p``, log power ``k q`` (Converges).
    """
    r = 2
    nr = n / r
    if not nu > nr - 1:
        raise ConeDomainError("nu must exceed n/r - 1")
    alpha = (2 * nr - 1) / p if alpha is None else alpha
    k = 1.0 / p if log_exponent is None else log_exponent
    q_nu = float(critical_indices(n, r, nu, 2).q_nu)
    q = p * q_nu
    base = {"n": n, "r": r}
    # (i) x-slice at y = e: the cone integral of Delta(y+e)^{-p alpha} (1+log)^{-p k}
    slice_params = dict(base, alpha=p * alpha, beta=0.0, delta=p * k)
    slice_probe = divergence_probe("log2_lemma", slice_params, truncations)
    # (ii) y-integral of the Box F slice norms
    a2 = ((alpha + 1) * p - nr) * q / p
    b2 = nu + q - nr
    box_params = dict(base, alpha=a2, beta=b2, delta=k * q)
    box_probe = divergence_probe("log2_lemma", box_params, truncations)
    steps = [
        {"step": "x-slice norm of F", "reduced_alpha": p * alpha, "beta": 0.0,
         "delta": p * k, "critical": bool(abs(p * alpha - (2 * nr - 1)) < 1e-12)},
        {"step": "y-integral of Box F slice norms", "reduced_alpha": a2, "beta": b2,
         "delta": k * q, "critical": bool(abs(a2 - b2 - (2 * nr - 1)) < 1e-9)},
    ]
    return WitnessReport(n, nu, p, q, alpha, k, slice_probe.to_dict(), box_probe.to_dict(),
                         (slice_probe.verdict, box_probe.verdict), steps)
