"""Integration over symmetric cones.

Two coordinate systems are provided.

* Triangular ("Gaussian") coordinates: ``xi = L L^T`` with ``L`` lower
  triangular.  Leading minors are products of squared diagonal entries,
  which keeps singular boundary behaviour on single axes.  Diagonal axes
  use a double-exponential rule on ``(0, inf)``, off-diagonal axes a
  Gauss-Hermite rule centred on the Gaussian weight ``exp(-(xi|y))``.
* Direct polar coordinates on the light cone,
  ``xi = (tau, tau s w)`` with ``d xi = tau^{n-1} s^{n-2} d tau ds dw``.

Lebesgue measure is the one attached to the trace inner product, i.e.
``2^{n/2}`` times coordinate measure on the light cone and packed
coordinate measure on Sym.

Closed forms (the cone gamma function, Laplace transforms of generalised
powers) live next to their quadrature counterparts; the two routes share
no code beyond evaluating the integrand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special
from scipy.special import logsumexp

from . import geometry as geo
from .jordan import ConeDescriptor, ConeDomainError

SQRT2 = math.sqrt(2.0)

__all__ = [
    "QuadratureSpec",
    "QuadResult",
    "integrate_cone",
    "gamma_omega",
    "gamma_omega_quad",
    "gamma_threshold",
    "laplace_power",
    "laplace_power_quad",
    "i_alpha",
    "i_alpha_truncations",
    "ProbeVerdict",
    "divergence_probe",
    "log_lemma_truncations",
    "log2_lemma_truncations",
    "discretization_bounds",
    "lebesgue_factor",
]


def lebesgue_factor(cone: ConeDescriptor) -> float:
    """Trace-form Lebesgue measure per unit of coordinate volume."""
    return 2.0 ** (cone.dim / 2) if cone.kind == "lightcone" else 1.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Node layout for :func:`integrate_cone`.

    Attributes
    ----------
    scheme : {"gaussian", "polar"}
    truncation : (float, float)
        Range of the parameter ``t`` on half-line axes
        (``x = exp(t - exp(-t))``, double-exponential towards 0).
    nodes : (int, int), optional
        Nodes per half-line axis and per Gauss-Hermite (or angular) axis.
        Defaults to ``(64, 8)`` in rank at most 2 and ``(44, 8)`` above,
        which keeps rank-3 tensor grids near 5e7 points.
    tol : float
        Target relative accuracy; only reported.
    """

    scheme: str = "gaussian"
    truncation: tuple = (-4.5, 3.0)
    nodes: tuple | None = None
    tol: float = 1e-8

    def __post_init__(self):
        if self.scheme not in ("gaussian", "polar"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.nodes is not None and min(self.nodes) < 8:
            raise ValueError("at least 8 nodes per axis")
        lo, hi = self.truncation
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ValueError("truncation bounds must be finite and increasing")

    def node_counts(self, rank: int) -> tuple:
        if self.nodes is not None:
            return tuple(self.nodes)
        return (64, 8) if rank <= 2 else (44, 8)


@dataclass
class QuadResult:
    value: float
    error: float
    evaluations: int
    info: dict = field(default_factory=dict)

    def __float__(self):
        return self.value


# ---------------------------------------------------------------------------
# one-dimensional rules
# ---------------------------------------------------------------------------

def _de_halfline(n: int, lo: float, hi: float):
    """Trapezoid rule in ``t`` for ``x = exp(t - exp(-t))`` on (0, inf).

    Algebraic behaviour at 0 becomes double-exponential decay in ``t``;
    Gaussian decay at infinity is double-exponential as well.
    """
    t = np.linspace(lo, hi, n)
    h = t[1] - t[0]
    x = np.exp(t - np.exp(-t))
    w = h * x * (1.0 + np.exp(-t))
    return x, w


def _gauss_hermite(n: int):
    x, w = special.roots_hermite(n)
    # weights for plain integrals of functions ~ exp(-x^2) * smooth
    return x, w * np.exp(x * x)


# ---------------------------------------------------------------------------
# triangular coordinates
# ---------------------------------------------------------------------------

def _block_sum(v, block: int = 512) -> float:
    """Pairwise sums over short blocks, then exact summation of the blocks."""
    n = len(v) - len(v) % block
    head = np.sum(v[:n].reshape(-1, block), axis=1)
    return math.fsum(np.concatenate([head, v[n:]]))


def _triangular_layout(cone: ConeDescriptor, y):
    """Centring data for the Gaussian weight ``exp(-(xi|y))``.

    Returns per-diagonal scales ``kappa`` (coefficient of the squared
    diagonal entry after completing squares), and per-column affine maps
    ``w = -D * shift + scale @ v`` for the off-diagonal entries.
    """
    if cone.kind == "lightcone":
        y1, y2, ypp = y[0], y[1], y[2:]
        beta = y1 + y2
        if beta <= 0:
            raise ConeDomainError("weight point must be interior")
        kappa = np.array([cone.det(y) / beta, beta])
        cols = [(ypp / beta, np.eye(cone.dim - 2) / np.sqrt(beta))]
        return kappa, cols
    Y = cone.to_matrix(y)
    r = cone.size
    kappa = np.empty(r)
    cols = []
    for j in range(r):
        Yj = Y[j:, j:]
        y00, yv, Yr = Yj[0, 0], Yj[1:, 0], Yj[1:, 1:]
        if r - j - 1:
            sol = np.linalg.solve(Yr, yv)
            kappa[j] = y00 - yv @ sol
            ev, V = np.linalg.eigh(Yr)
            cols.append((sol, (V / np.sqrt(ev)) @ V.T))
        else:
            kappa[j] = y00
            cols.append((np.zeros(0), np.zeros((0, 0))))
    return kappa, cols


def _diag_terms(cone: ConeDescriptor, D):
    """Jacobian and principal minors, which depend on the diagonal only.

    Minors come straight from the triangular coordinates, so they stay
    accurate near the boundary where recomputing them from ``xi`` cancels.
    """
    r = cone.rank
    if cone.kind == "lightcone":
        A, C = D[:, 0], D[:, 1]
        a = A * A
        jac = 2.0 * A ** (cone.dim - 1) * C
        return jac, np.stack([a, a * C * C], axis=1)
    jac = 2.0 ** r * np.prod(D ** (r - np.arange(r)), axis=1)
    jac = jac * 2.0 ** ((r * (r - 1) // 2) / 2.0)
    return jac, np.cumprod(D * D, axis=1)


def _assemble(cone: ConeDescriptor, D, W):
    """Points from diagonal ``D (m, r)`` and off-diagonals.

    ``W`` is a list with one ``(m, k_j)`` block per column.
    """
    m = D.shape[0]
    if cone.kind == "lightcone":
        A, C = D[:, 0], D[:, 1]
        w = W[0]
        ww = np.sum(w * w, axis=1)
        a = A * A
        b = ww + C * C
        xi = np.empty((m, cone.dim))
        xi[:, 0] = 0.5 * (a + b)
        xi[:, 1] = 0.5 * (b - a)
        xi[:, 2:] = A[:, None] * w
        return xi
    r = cone.size
    # entries of L column by column: L[i][k] for k <= i
    L = [[None] * r for _ in range(r)]
    for k in range(r):
        L[k][k] = D[:, k]
        for t, i in enumerate(range(k + 1, r)):
            L[i][k] = W[k][:, t]
    xi = np.empty((m, cone.dim))
    for i in range(r):
        xi[:, i] = sum(L[i][k] * L[i][k] for k in range(i + 1))
    pos = r
    for i in range(r):
        for j in range(i + 1, r):
            xi[:, pos] = SQRT2 * sum(L[i][k] * L[j][k] for k in range(i + 1))
            pos += 1
    return xi


def _gaussian_rule(cone, f, spec, y, thin: int, chunk: int, with_minors: bool):
    r = cone.rank
    kappa, cols = _triangular_layout(cone, y)
    nd, ngh = spec.node_counts(cone.rank)
    x, wx = _de_halfline(nd, *spec.truncation)
    x, wx = x[::thin], wx[::thin] * thin
    g, wg = _gauss_hermite(ngh)
    # per-column off-diagonal tensor grids
    col_grids = []
    for shift, scale in cols:
        k = len(shift)
        if k == 0:
            col_grids.append((np.zeros((1, 0)), np.ones(1), shift, scale))
            continue
        mesh = np.stack(np.meshgrid(*([g] * k), indexing="ij"), -1).reshape(-1, k)
        wm = np.prod(np.stack(np.meshgrid(*([wg] * k), indexing="ij"), -1).reshape(-1, k), axis=1)
        col_grids.append((mesh, wm * abs(np.linalg.det(scale)), shift, scale))
    # diagonal tensor grid
    dscale = 1.0 / np.sqrt(kappa)
    dmesh = np.stack(np.meshgrid(*([x] * r), indexing="ij"), -1).reshape(-1, r) * dscale
    dw = np.prod(np.stack(np.meshgrid(*([wx] * r), indexing="ij"), -1).reshape(-1, r), axis=1)
    dw = dw * np.prod(dscale)
    # combined off-diagonal grid (all columns)
    offs = [cg[0] for cg in col_grids]
    offw = [cg[1] for cg in col_grids]
    idx = np.stack(np.meshgrid(*[np.arange(len(o)) for o in offs], indexing="ij"), -1).reshape(-1, len(offs))
    wo = np.prod(np.stack([offw[c][idx[:, c]] for c in range(len(offs))], 1), axis=1)
    total = []
    evals = 0
    per = max(1, chunk // len(idx))
    for s in range(0, len(dmesh), per):
        D = dmesh[s:s + per]
        md = len(D)
        Drep = np.repeat(D, len(idx), axis=0)
        W = []
        for c, (mesh, _, shift, scale) in enumerate(col_grids):
            v = mesh[idx[:, c]]
            v = np.tile(v, (md, 1))
            if len(shift):
                W.append(-Drep[:, c:c + 1] * shift + v @ scale.T)
        xi = _assemble(cone, Drep, W)
        jac, minors = _diag_terms(cone, D)
        jac = np.repeat(jac, len(idx))
        if with_minors:
            minors = np.repeat(minors, len(idx), axis=0)
        vals = np.asarray(f(xi, minors) if with_minors else f(xi), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = xi[~np.isfinite(vals)][:3]
            raise FloatingPointError(f"non-finite integrand at {bad.tolist()}")
        wt = np.repeat(dw[s:s + per], len(idx)) * np.tile(wo, md)
        total.append(_block_sum(vals * jac * wt))
        evals += len(xi)
    return math.fsum(total) * lebesgue_factor(cone), evals


# ---------------------------------------------------------------------------
# light-cone polar coordinates
# ---------------------------------------------------------------------------

def _sphere_rule(dim: int, n: int):
    """Quadrature on the unit sphere of R^dim (dim >= 2): points, weights."""
    if dim == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if dim == 2:
        th = 2 * np.pi * np.arange(n) / n
        return np.stack([np.cos(th), np.sin(th)], 1), np.full(n, 2 * np.pi / n)
    # cos of the polar angle with Gegenbauer weight, then recurse
    a = (dim - 3) / 2.0
    c, wc = special.roots_jacobi(n, a, a)
    sub, wsub = _sphere_rule(dim - 1, n)
    s = np.sqrt(1 - c * c)
    pts = np.concatenate([
        np.repeat(c, len(sub))[:, None],
        (s[:, None, None] * sub[None, :, :]).reshape(-1, dim - 1),
    ], axis=1)
    return pts, np.outer(wc, wsub).ravel()


def _polar_rule(cone, f, spec, thin: int, chunk: int, with_minors: bool):
    if cone.kind != "lightcone":
        raise ValueError("the polar scheme is implemented for the light cone")
    n = cone.dim
    nd, nang = spec.node_counts(cone.rank)
    tau, wt = _de_halfline(nd, *spec.truncation)
    tau, wt = tau[::thin], wt[::thin] * thin
    # s in (0,1): tanh-sinh
    u = np.linspace(-3.2, 3.2, max(nd, 8))[::thin]
    hu = (u[1] - u[0])
    arg = 0.5 * np.pi * np.sinh(u)
    sv = special.expit(2 * arg)
    oms = special.expit(-2 * arg)  # 1 - s without cancellation
    ws = hu * 0.5 * 0.5 * np.pi * np.cosh(u) / np.cosh(arg) ** 2
    om, wom = _sphere_rule(n - 1, nang)
    T, S, K = np.meshgrid(np.arange(len(tau)), np.arange(len(sv)), np.arange(len(om)), indexing="ij")
    T, S, K = T.ravel(), S.ravel(), K.ravel()
    total = []
    for s0 in range(0, len(T), chunk):
        t_, s_, k_ = T[s0:s0 + chunk], S[s0:s0 + chunk], K[s0:s0 + chunk]
        ta, ss = tau[t_], sv[s_]
        xi = np.concatenate([ta[:, None], (ta * ss)[:, None] * om[k_]], axis=1)
        if with_minors:
            # Delta_1 = tau (1 - s w_1), Delta = tau^2 (1 - s)(1 + s)
            m = np.stack([ta * (oms[s_] + ss * (1 - om[k_, 0])), ta * ta * oms[s_] * (1 + ss)],
                         axis=1)
            vals = np.asarray(f(xi, m), dtype=float)
        else:
            vals = np.asarray(f(xi), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = xi[~np.isfinite(vals)][:3]
            raise FloatingPointError(f"non-finite integrand at {bad.tolist()}")
        jac = ta ** (n - 1) * ss ** (n - 2)
        total.append(math.fsum(vals * jac * wt[t_] * ws[s_] * wom[k_]))
    return math.fsum(total) * lebesgue_factor(cone), len(T)


def integrate_cone(cone: ConeDescriptor, f: Callable[[np.ndarray], np.ndarray],
                   spec: QuadratureSpec | None = None, weight_point=None,
                   chunk: int = 2_000_000, with_minors: bool = False) -> QuadResult:
    """Integrate ``f`` over the cone.

    Parameters
    ----------
    f : callable
        Maps points ``(m, n)`` to values ``(m,)``.
    spec : QuadratureSpec, optional
    weight_point : array_like, optional
        Interior point ``y`` such that ``f`` carries the Gaussian-type decay
        ``exp(-(xi|y))`` in triangular coordinates (defaults to ``e``).
        Off-diagonal nodes are centred and scaled for this weight.
    with_minors : bool
        Call ``f(xi, minors)`` with principal minors computed from the
        coordinates of the rule (accurate near the boundary).

    Returns
    -------
    QuadResult
        Value and an error estimate from the same rule at half resolution.
    """
    spec = spec or QuadratureSpec()
    y = cone.identity if weight_point is None else np.asarray(weight_point, float)
    cone.check_interior(y)
    if spec.scheme == "gaussian":
        fine, ev = _gaussian_rule(cone, f, spec, y, 1, chunk, with_minors)
        coarse, ev2 = _gaussian_rule(cone, f, spec, y, 2, chunk, with_minors)
    else:
        fine, ev = _polar_rule(cone, f, spec, 1, chunk, with_minors)
        coarse, ev2 = _polar_rule(cone, f, spec, 2, chunk, with_minors)
    return QuadResult(fine, abs(fine - coarse), ev + ev2, {"coarse": coarse, "scheme": spec.scheme})


# ---------------------------------------------------------------------------
# cone gamma function and Laplace transforms
# ---------------------------------------------------------------------------

def gamma_threshold(cone: ConeDescriptor) -> np.ndarray:
    """Lower bounds ``(j-1) d / 2`` on ``s_j`` for convergence."""
    return np.arange(cone.rank) * cone.d / 2.0


def _check_s(cone, s):
    s = cone._index(s)
    thr = gamma_threshold(cone)
    bad = np.nonzero(~(s > thr))[0]
    if len(bad):
        j = int(bad[0])
        raise ConeDomainError(
            f"s_{j + 1} = {s[j]} must exceed {thr[j]} for the cone gamma integral to converge"
        )
    return s


def gamma_omega(cone: ConeDescriptor, s) -> float:
    """Closed-form cone gamma function (product of classical gammas)."""
    s = _check_s(cone, s)
    n, r = cone.dim, cone.rank
    lg = special.gammaln(s - gamma_threshold(cone)).sum()
    return float(np.exp(0.5 * (n - r) * np.log(2 * np.pi) + lg))


def _laplace_integrand(cone, y, s):
    s = np.asarray(s, dtype=float)
    expo = s - np.concatenate([s[1:], [0.0]])
    expo[-1] -= cone.n_over_r
    # trace-form pairing with y as a plain dot product
    ydual = (2.0 if cone.kind == "lightcone" else 1.0) * np.asarray(y, dtype=float)

    def f(xi, m):
        with np.errstate(divide="ignore", invalid="ignore"):
            logv = np.log(m) @ expo - xi @ ydual
        return np.exp(logv)

    return f


def gamma_omega_quad(cone: ConeDescriptor, s, spec: QuadratureSpec | None = None) -> QuadResult:
    """Quadrature of ``int exp(-(xi|e)) Delta_s(xi) Delta(xi)^{-n/r} d xi``."""
    s = _check_s(cone, s)
    return integrate_cone(cone, _laplace_integrand(cone, cone.identity, s), spec,
                          with_minors=True)


def laplace_power(cone: ConeDescriptor, y, s) -> float:
    """Closed form ``Gamma_Omega(s) Delta_s(y^{-1})``."""
    s = _check_s(cone, s)
    y = np.asarray(y, dtype=float)
    return gamma_omega(cone, s) * float(cone.generalized_power(cone.inverse(y), s))


def laplace_power_quad(cone: ConeDescriptor, y, s, spec: QuadratureSpec | None = None) -> QuadResult:
    """Quadrature of ``int exp(-(xi|y)) Delta_s(xi) Delta(xi)^{-n/r} d xi``."""
    s = _check_s(cone, s)
    y = np.asarray(y, dtype=float)
    return integrate_cone(cone, _laplace_integrand(cone, y, s), spec, weight_point=y,
                          with_minors=True)


# ---------------------------------------------------------------------------
# I_alpha on the light cone
# ---------------------------------------------------------------------------

def _gl(n=16):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1), 0.5 * w


def _i_alpha_levels(cone, alpha, y, levels, order=16, n_theta=32, panel_scale=None):
    """Contributions of dyadic levels to ``int |Delta(x+iy)|^{-alpha} dx``.

    Coordinates: ``x = (x_1, rho w)``, ``u = x_1 - rho``, ``v = x_1 + rho``.
    Panels in ``u`` and ``v`` are graded geometrically around 0; level ``k``
    collects the panel pairs whose outer edge is ``scale 2^k``.
    ``panel_scale`` (default ``y_1``) sets the unit of the panel grid.
    Returns the array of per-level sums (level ``kmin`` first).
    """
    if cone.kind != "lightcone":
        raise NotImplementedError("I_alpha quadrature is implemented for the light cone")
    n = cone.dim
    y = np.asarray(y, dtype=float)
    cone.check_interior(y)
    yp = y[1:]
    ynorm = np.linalg.norm(yp)
    scale = y[0] if panel_scale is None else float(panel_scale)
    kmin, kmax = levels
    edges = scale * 2.0 ** np.arange(kmin, kmax + 1)
    pos = np.concatenate([[0.0], edges])
    # panel list: (a, b, level)
    panels = []
    for i in range(len(pos) - 1):
        panels.append((pos[i], pos[i + 1], kmin + i if i else kmin))
        panels.append((-pos[i + 1], -pos[i], kmin + i if i else kmin))
    panels.sort()
    # angular rule: integrand depends on w only through w . y'/|y'|
    if n == 3:
        th = 2 * np.pi * np.arange(n_theta) / n_theta
        cth, wth = np.cos(th), np.full(n_theta, 2 * np.pi / n_theta)
    else:
        a = (n - 4) / 2.0
        cth, wth = special.roots_jacobi(n_theta, a, a)
        wth = wth * 2 * np.pi ** ((n - 2) / 2) / special.gamma((n - 2) / 2)
    xg, wg = _gl(order)

    def block(u, v, w):
        # u, v, w flattened node arrays (same length)
        x1 = 0.5 * (u + v)
        rho = 0.5 * (v - u)
        acc = np.zeros_like(u)
        for c, wc in zip(cth, wth):
            re = x1 * x1 - y[0] ** 2 - rho * rho + ynorm ** 2
            im = 2 * x1 * y[0] - 2 * rho * ynorm * c
            acc += wc * (re * re + im * im) ** (-alpha / 2)
        return math.fsum(acc * rho ** (n - 2) * w * 0.5)

    out = np.zeros(kmax - kmin + 1)
    for (ua, ub, lu) in panels:
        for (va, vb, lv) in panels:
            if va < ua:
                continue
            lvl = max(lu, lv)
            if va > ua:
                if vb <= ua:
                    continue
                U = ua + (ub - ua) * xg
                V = va + (vb - va) * xg
                UU, VV = np.meshgrid(U, V, indexing="ij")
                WW = np.outer(wg, wg) * (ub - ua) * (vb - va)
                out[lvl - kmin] += block(UU.ravel(), VV.ravel(), WW.ravel())
            else:
                # triangle ua <= u <= v <= ub
                V = ua + (ub - ua) * xg
                T = xg
                VV, TT = np.meshgrid(V, T, indexing="ij")
                UU = ua + (VV - ua) * TT
                WW = np.outer(wg * (ub - ua), wg) * (VV - ua)
                out[lvl - kmin] += block(UU.ravel(), VV.ravel(), WW.ravel())
    return out * lebesgue_factor(cone)


def i_alpha_truncations(cone: ConeDescriptor, alpha: float, y=None, kmax: int = 40,
                        kmin: int = -4, panel_scale: float | None = None) -> tuple:
    """Truncated integrals ``J_k`` over ``|u|, |v| <= s 2^k`` (``s = y_1`` by default)."""
    y = cone.identity if y is None else np.asarray(y, float)
    lv = _i_alpha_levels(cone, alpha, y, (kmin, kmax), panel_scale=panel_scale)
    J = np.cumsum(lv)
    T = (y[0] if panel_scale is None else panel_scale) * 2.0 ** np.arange(kmin, kmax + 1)
    return T, J


def i_alpha(cone: ConeDescriptor, alpha: float, y=None, kmax: int = 30,
            panel_scale: float | None = None) -> float:
    """``int_{R^n} |Delta(x + i y)|^{-alpha} dx`` with dyadic tail extrapolation.

    Panels follow ``y_1`` unless ``panel_scale`` fixes them, which is how a
    dilation check avoids reusing a rescaled copy of the same rule.
    The last shells decay like ``2^{-k (alpha - (2n/r - 1))}``; the tail
    beyond the truncation is summed as a geometric series with that ratio.
    Below the threshold the integral diverges and a
    :class:`ConeDomainError` is raised (use :func:`divergence_probe`).
    """
    thr = 2 * cone.n_over_r - 1
    if alpha <= thr:
        raise ConeDomainError(
            f"alpha={alpha} <= {thr}: the integral diverges; see divergence_probe"
        )
    T, J = i_alpha_truncations(cone, alpha, y, kmax, panel_scale=panel_scale)
    q = 2.0 ** (-(alpha - thr))
    last = J[-1] - J[-2]
    return float(J[-1] + last * q / (1 - q))


# ---------------------------------------------------------------------------
# divergence probes
# ---------------------------------------------------------------------------

@dataclass
class ProbeVerdict:
    converges: bool
    value: float
    truncations: list
    values: list
    rel_increment: float
    family: str
    params: dict
    log_values: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "Converges" if self.converges else "Diverges"

    def to_dict(self):
        return {
            "family": self.family,
            "params": self.params,
            "verdict": self.verdict,
            "value": self.value if math.isfinite(self.value) else None,
            "rel_increment": self.rel_increment,
            "truncations": list(map(float, self.truncations)),
            # overflowed values are null; log_values stays finite
            "values": [float(v) if math.isfinite(v) else None for v in self.values],
            "log_values": list(map(float, self.log_values)),
        }


def _log_panels(T_list, lo=0.0):
    """Panel edges in [lo, max T] with every T an edge and geometric grading."""
    edges = {lo}
    x = 1.0
    top = max(T_list)
    while x < top:
        edges.add(x)
        x *= 2.0
    edges.update(T_list)
    return np.array(sorted(e for e in edges if e <= top))


def log_lemma_truncations(alpha: float, truncations: Sequence[float]):
    """``int_{e^{-L}}^{e^{L}} exp(-u^2) (1 + 2|log u|)^{-alpha} du/u`` per ``L``.

    Evaluated in ``v = log u`` on geometrically graded Gauss-Legendre panels.
    """
    xg, wg = _gl(24)
    edges = _log_panels(list(truncations))

    def f(v):
        # both signs of v: u = e^{v} and u = e^{-v}
        with np.errstate(over="ignore"):
            return (np.exp(-np.exp(2 * v)) + np.exp(-np.exp(-2 * v))) * (1 + 2 * v) ** (-alpha)

    cum = [0.0]
    for a, b in zip(edges[:-1], edges[1:]):
        # substitute v = a + (b - a) t; the integrand is smooth on each panel
        v = a + (b - a) * xg
        cum.append(cum[-1] + math.fsum(f(v) * wg * (b - a)))
    cum = np.array(cum)
    return np.array([cum[np.searchsorted(edges, L)] for L in truncations])


def _softplus(t):
    return np.logaddexp(0.0, t)


def log2_lemma_truncations(alpha: float, beta: float, delta: float, n: int, r: int,
                           truncations: Sequence[float]) -> np.ndarray:
    """Polar-coordinate integral of ``Delta^beta(y) / (Delta^alpha(y+e)
    (1 + log Delta(y+e))^delta)`` truncated to ``|t_j| <= T``.

    Supports rank one and rank two.  Returns the **logarithm** of each
    truncated value, since off the critical line the growth is exponential
    in ``T``.
    """
    if beta <= -1:
        raise ConeDomainError("beta must exceed -1")
    nr = n / r
    d = 0.0 if r == 1 else 2 * (nr - 1) / (r - 1)
    xg, wg = _gl(20)
    top = max(truncations)
    edges = np.concatenate([-_log_panels([top])[::-1], _log_panels([top])[1:]])
    edges = np.unique(np.concatenate([edges, -np.asarray(truncations), truncations]))
    lwg = np.log(wg)

    def log_g(t1, t2):
        sp1, sp2 = _softplus(t1), _softplus(t2)
        w = 0.5 * (t2 - t1)
        with np.errstate(divide="ignore"):
            lsh = w + np.log(-np.expm1(-2 * w) / 2)
        return ((t1 + t2) * (nr + beta) + d * lsh - alpha * (sp1 + sp2)
                - delta * np.log1p(sp1 + sp2))

    if r == 1:
        panels = []
        for a, b in zip(edges[:-1], edges[1:]):
            t = a + (b - a) * xg
            lg = t * (nr + beta) - alpha * _softplus(t) - delta * np.log1p(_softplus(t))
            panels.append((a, b, logsumexp(lg + lwg + np.log(b - a))))
        return np.array([logsumexp([v for a, b, v in panels if -T <= a and b <= T])
                         for T in truncations])
    if r != 2:
        raise NotImplementedError("rank > 2 polar integrals are not implemented")

    # outer t2 panels; inner t1 in [-T, t2) on the same edges cut at t2.
    # For each outer node keep the log contribution of every inner panel.
    outer = []
    for a, b in zip(edges[:-1], edges[1:]):
        t2 = a + (b - a) * xg
        lw2 = lwg + np.log(b - a)
        nodes = []
        for s_, lw in zip(t2, lw2):
            e1 = np.concatenate([edges[edges < s_], [s_]])
            A, B = e1[:-1], e1[1:]
            t1 = A[:, None] + (B - A)[:, None] * xg[None, :]
            lv = log_g(t1, s_) + lwg[None, :] + np.log(B - A)[:, None]
            nodes.append((A, lw + logsumexp(lv, axis=1)))
        outer.append((a, b, nodes))
    res = []
    for T in truncations:
        terms = [lp[A >= -T] for a, b, nodes in outer if a >= -T and b <= T
                 for A, lp in nodes]
        res.append(logsumexp(np.concatenate(terms)))
    return np.array(res)


def divergence_probe(family: str, params: dict | None = None,
                     truncations: Sequence[float] | None = None,
                     tol: float = 1e-3) -> ProbeVerdict:
    """Decide convergence of a non-negative integral from its truncations.

    Families
    --------
    ``log_lemma``  params ``alpha``; truncation is the cutoff ``L`` on ``|log u|``.
    ``log2_lemma`` params ``alpha, beta, delta, n, r``; cutoff on ``|t_j|``.
    ``i_alpha``    params ``alpha, n`` (light cone, ``y = e``); dyadic
                   exponent ``k`` of the cutoff ``2^k`` on ``|u|, |v|``.

    The verdict is Diverges when the relative increment between the last two
    truncations exceeds ``tol``.
    """
    params = dict(params or {})
    if family == "log_lemma":
        truncations = truncations or [10.0 ** k for k in range(1, 17)]
        logs = np.log(log_lemma_truncations(params["alpha"], truncations))
    elif family == "log2_lemma":
        truncations = truncations or [10.0 ** k for k in range(1, 17)]
        p = {"n": 3, "r": 2, "beta": 0.0, "delta": 0.0}
        p.update(params)
        params = p
        logs = log2_lemma_truncations(p["alpha"], p["beta"], p["delta"], p["n"], p["r"], truncations)
    elif family == "i_alpha":
        from .jordan import lightcone

        p = {"n": 3}
        p.update(params)
        params = p
        truncations = truncations or list(range(4, 41))
        ks = np.asarray(truncations, dtype=int)
        T, J = i_alpha_truncations(lightcone(int(p["n"])), p["alpha"], kmax=int(ks.max()))
        kmin = -4
        logs = np.log(J[ks - kmin])
        truncations = list(map(int, ks))
    else:
        raise ValueError(f"unknown probe family {family!r}")
    if len(truncations) < 4 or np.any(np.diff(truncations) <= 0):
        raise ValueError("need at least 4 strictly increasing truncations")
    logs = np.asarray(logs, dtype=float)
    if np.any(np.diff(logs) < -1e-12):
        raise RuntimeError("truncated integrals decreased; integrand must be non-negative")
    inc = -math.expm1(logs[-2] - logs[-1])
    conv = bool(inc <= tol)
    with np.errstate(over="ignore"):
        vals = np.exp(logs)
    return ProbeVerdict(conv, float(vals[-1]), list(truncations), vals.tolist(), float(inc),
                        family, params, logs.tolist())


# ---------------------------------------------------------------------------
# lattice discretisation of integrals
# ---------------------------------------------------------------------------

def discretization_bounds(cone: ConeDescriptor, lattice, s, y, f=None, gamma: float | None = None,
                          samples: int = 200_000, seed: int = 0) -> dict:
    """Lattice sums sandwiching ``int f exp(-(y|xi)) Delta_s(xi) d xi``.

    The integral runs over the Whitney cells of ``lattice`` (the covered
    truncation); cell integrals ``int_{E_j} f`` and the middle integral are
    Monte-Carlo estimates on a coordinate box around the shell.

    Returns
    -------
    dict with keys lower, middle, upper, C, gamma, cell_integrals.
    """
    from .lattice import shell_box, whitney_assign

    y = np.asarray(y, dtype=float)
    s = cone._index(s)
    rng = np.random.default_rng(seed)
    if gamma is None:
        gamma = geo.pairing_ratio_bound(cone, lattice.radius, rng, 2000)
    center, half = shell_box(cone, lattice.region)
    pts = center + rng.uniform(-1, 1, (samples, cone.dim)) * half
    vol = np.prod(2 * half) * lebesgue_factor(cone)
    inside = cone.is_interior(pts)
    pts = pts[inside]
    fv = np.ones(len(pts)) if f is None else np.asarray(f(pts), dtype=float)
    cell = whitney_assign(lattice, pts)
    keep = cell >= 0
    pts, fv, cell = pts[keep], fv[keep], cell[keep]
    N = len(lattice)
    cell_int = np.bincount(cell, weights=fv, minlength=N) * vol / samples
    weight = np.exp(-cone.inner(pts, y)) * cone.generalized_power(pts, s)
    middle = float(np.sum(fv * weight) * vol / samples)
    pair = cone.inner(lattice.points, y)
    gp = cone.generalized_power(lattice.points, s)
    lower = float(np.sum(np.exp(-gamma * pair) * gp * cell_int))
    upper = float(np.sum(np.exp(-pair / gamma) * gp * cell_int))
    C = max(lower / middle if middle > 0 else np.inf, middle / upper if upper > 0 else np.inf, 1.0)
    return {"lower": lower, "middle": middle, "upper": upper, "C": float(C),
            "gamma": float(gamma), "cell_integrals": cell_int.tolist()}
