"""Acceptance suite: thirteen end-to-end checks with fixed seeds and budgets.

Each check returns a :class:`CriterionResult`; a check passes only when its
numerical condition holds and it finishes inside its time budget.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_all"]


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float
    budget: float
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name} ({self.seconds:.1f}s / {self.budget:.0f}s)"

    def to_dict(self):
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "seconds": self.seconds, "budget": self.budget, "detail": self.detail}


# ---------------------------------------------------------------------------
# shared fixtures
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def family_setup():
    """Light-cone lattice on the shell (1, 8), its 64^3 bank and the fixed family."""
    from .jordan import lightcone
    from .lattice import ShellRegion, generate_lattice, shell_box
    from .lp import build_filter_bank, family_spec, make_grid

    cone = lightcone(3)
    lat = generate_lattice(cone, ShellRegion(1.0, 8.0), seed=0)
    center, half = shell_box(cone, lat.region)
    grid = make_grid(cone, np.abs(center) + half, 64)
    bank = build_filter_bank(lat, grid)
    spec = family_spec(bank, grid, seed=0)
    return cone, lat, grid, bank, spec


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

GAMMA_CASES = {
    "lightcone3": [(1.0, 1.0), (2.0, 2.0), (1.5, 0.75), (3.0, 1.0), (2.5, 2.0)],
    "lightcone5": [(2.0, 2.0), (2.5, 1.75), (1.2, 3.0), (4.0, 2.0), (3.0, 3.5)],
    "sym2": [(1.0, 1.0), (2.0, 2.0), (0.5, 1.5), (3.0, 0.75), (1.5, 2.5)],
    "sym3": [(1.0, 1.0, 1.5), (2.0, 2.0, 2.0), (0.5, 1.0, 2.0), (3.0, 1.5, 1.25), (1.5, 2.5, 3.0)],
}


def c01_gamma():
    from .jordan import parse_cone
    from .quadrature import gamma_omega, gamma_omega_quad

    worst, rows = 0.0, []
    for name, cases in GAMMA_CASES.items():
        cone = parse_cone(name)
        for s in cases:
            exact = gamma_omega(cone, s)
            quad = gamma_omega_quad(cone, s).value
            err = abs(quad - exact) / exact
            worst = max(worst, err)
            rows.append({"cone": name, "s": list(s), "closed": exact, "quad": quad, "rel_err": err})
    return worst < 1e-6, {"max_rel_err": worst, "rows": rows}


def c02_laplace():
    from .jordan import parse_cone
    from .quadrature import gamma_threshold, laplace_power, laplace_power_quad

    rng = np.random.default_rng(2)
    families = {"lightcone": ["lightcone3", "lightcone5"], "sym": ["sym2", "sym3"]}
    worst, rows = 0.0, []
    for fam, names in families.items():
        for i in range(10):
            cone = parse_cone(names[i % 2])
            y = cone.random_interior(rng, spread=0.5)
            s = gamma_threshold(cone) + rng.uniform(0.5, 2.5, cone.rank)
            exact = laplace_power(cone, y, s)
            quad = laplace_power_quad(cone, y, s).value
            err = abs(quad - exact) / abs(exact)
            worst = max(worst, err)
            rows.append({"cone": cone.name, "y": y.tolist(), "s": s.tolist(), "rel_err": err})
    return worst < 1e-5, {"max_rel_err": worst, "rows": rows}


def c03_lattice():
    from .jordan import parse_cone
    from .lattice import ShellRegion, generate_lattice, verify_lattice

    ok, detail = True, {}
    for name in ("lightcone3", "sym2"):
        cone = parse_cone(name)
        overlaps, reports = [], []
        for seed in (0, 1, 2):
            lat = generate_lattice(cone, ShellRegion(1.0, 8.0), delta=0.5, R=2.0, seed=seed)
            rep = verify_lattice(lat, samples=100_000, seed=seed + 10)
            overlaps.append(rep.overlap)
            reports.append(rep.to_dict())
            ok &= rep.separation_ok and rep.covering_failures == 0
        stable = max(overlaps) - min(overlaps) <= 2
        ok &= stable
        detail[name] = {"overlaps": overlaps, "stable": stable,
                        "reports": [{k: r[k] for k in ("n_points", "min_distance",
                                                       "covering_failures", "overlap")}
                                    for r in reports]}
    return bool(ok), detail


def c04_lightcone_grid():
    from .jordan import lightcone
    from .lattice import lightcone_grid, verify_nesting

    grid = lightcone_grid(3, ell_range=(0, 2), j_max=3, seed=0)
    cone = lightcone(3)
    worst = 0.0
    interior = True
    for ell, j, k, xi in grid.points():
        interior &= bool(cone.is_interior(xi))
        target = 2.0 ** (2 * ell - 2 * j)
        worst = max(worst, abs(cone.det(xi) - target) / target)
    rep = verify_nesting(grid, samples=20_000, seed=0)
    ok = interior and worst < 1e-12 and rep.scale_spread < 0.05 and 0.5 <= rep.j_ratio <= 2.0
    return bool(ok), {"interior": interior, "det_rel_err": worst,
                      "scale_spread": rep.scale_spread, "j_ratio": rep.j_ratio,
                      "eta1": rep.eta1, "eta2": rep.eta2}


def c05_partition():
    from .lp import lp_blocks, partition_error

    cone, lat, grid, bank, spec = family_setup()
    part = partition_error(bank, samples=10_000, seed=0)
    errs = []
    for member in spec:
        f = member.sample(grid)
        total = sum(b.samples for b in lp_blocks(f, bank))
        errs.append(float(np.linalg.norm(total - f.samples) / np.linalg.norm(f.samples)))
    worst_part = max(part["grid"], part["samples"])
    ok = worst_part < 1e-10 and max(errs) < 1e-8 and len(errs) == 10
    return ok, {"partition_error": part, "reconstruction_errors": errs, "lattice_size": len(lat)}


BOX_FREQS = [[1.0, 0.5, 0.25], [0.75, 0.0, -0.5], [1.0, -0.25, 0.5], [0.5, 0.25, 0.0]]
BOX_AMPS = [1.0, 0.5j, -0.7, 0.3 + 0.2j]


def box_convergence(sizes=(16, 32, 64)):
    """Relative gap between spectral and finite-difference Box on one periodic box."""
    from .jordan import lightcone
    from .lp import box_finite_difference, box_power, make_grid, plane_wave_field

    cone = lightcone(3)
    errs = []
    for N in sizes:
        # the box length stays fixed while the step halves
        grid = make_grid(cone, N / sizes[0], N)
        f = plane_wave_field(grid, BOX_FREQS, BOX_AMPS)
        a = box_power(f, 1).samples
        b = box_finite_difference(f).samples
        errs.append(float(np.linalg.norm(a - b) / np.linalg.norm(a)))
    orders = [float(np.log2(errs[i] / errs[i + 1])) for i in range(len(errs) - 1)]
    return errs, orders


def c06_box():
    from .lp import bernstein_check

    errs, orders = box_convergence()
    bern = [bernstein_check(m) for m in (1, 2)]
    ok = min(orders) >= 1.8 and all(b["ratio_variance"] < 1e-8 for b in bern) \
        and all(b["abs_rel_error"] < 1e-6 for b in bern)
    return ok, {"fd_errors": errs, "orders": orders, "bernstein": bern}


def c07_thresholds():
    from .quadrature import divergence_probe

    m = 0.25
    checks = [
        ("i_alpha n=3", "i_alpha", lambda a: {"alpha": a, "n": 3}, 2.0),
        ("i_alpha n=4", "i_alpha", lambda a: {"alpha": a, "n": 4}, 3.0),
        ("log lemma", "log_lemma", lambda a: {"alpha": a}, 1.0),
        ("two-factor beta=0", "log2_lemma", lambda a: {"alpha": a, "beta": 0.0, "delta": 0.0}, 2.0),
        ("two-factor beta=1/2", "log2_lemma",
         lambda a: {"alpha": a + 0.5, "beta": 0.5, "delta": 0.0}, 2.0),
        ("critical line delta", "log2_lemma",
         lambda d: {"alpha": 2.0, "beta": 0.0, "delta": d}, 1.0),
    ]
    rows, ok = [], True
    for name, fam, params, thr in checks:
        above = divergence_probe(fam, params(thr + m))
        below = divergence_probe(fam, params(thr - m))
        good = above.converges and not below.converges
        ok &= good
        rows.append({"check": name, "threshold": thr, "above": above.verdict,
                     "below": below.verdict, "correct": good})
    return bool(ok), {"checks": rows}


def c08_ialpha_scaling():
    from .jordan import lightcone
    from .quadrature import i_alpha

    cone = lightcone(3)
    # panel grids 1 and 3 are not dilates of each other by 4, so the two
    # values come from different node sets
    at_e = i_alpha(cone, 3.0, cone.identity, panel_scale=1.0)
    at_4e = i_alpha(cone, 3.0, 4 * cone.identity, panel_scale=3.0)
    ratio = at_4e / at_e
    err = abs(ratio * 64 - 1)
    return err < 0.01, {"I_e": at_e, "I_4e": at_4e, "ratio": ratio, "expected": 1 / 64,
                        "rel_err": err}


def c09_region():
    from .bergman import classify_region, critical_indices, kernel_membership, kernel_membership_oracle

    n, r = 3, 2
    eps = Fraction(1, 10 ** 9)
    gap_ok, gaps = True, []
    for nu in (Fraction(3, 2), Fraction(2), Fraction(5, 2), Fraction(4), Fraction(9, 4)):
        q_nu = critical_indices(n, r, nu, 2).q_nu
        lo = 1 + q_nu
        hi = min(2 * q_nu, q_nu + Fraction(n, n - r))
        v = lambda p: classify_region(n, r, nu, p, p).verdict
        good = (v(lo - eps) == "Bounded" and v(lo) == "Open" and v(hi - eps) == "Open"
                and v(hi) == "Unbounded")
        gap_ok &= good
        gaps.append({"nu": str(nu), "lo": str(lo), "hi": str(hi), "ok": good})
    q2_ok = all(classify_region(n, r, nu, p, 2).verdict == "Bounded"
                for nu in (Fraction(3, 2), Fraction(2), Fraction(7, 2))
                for p in (1, Fraction(3, 2), 2, 3, 4, 10, 100))
    idx = critical_indices(3, 2, 2, 4)
    lemma_ok = idx.q_tilde == 20 and kernel_membership(3, 2, 2, 4, 10) \
        and not kernel_membership(3, 2, 2, 4, 25)
    oracles = {q: kernel_membership_oracle(3, 2, 2, 4, q, slice_check=False) for q in (10, 25)}
    oracle_ok = all(o["agrees"] for o in oracles.values())
    ok = gap_ok and q2_ok and lemma_ok and oracle_ok
    return bool(ok), {"gaps": gaps, "q2_bounded": q2_ok, "q_tilde": str(idx.q_tilde),
                      "oracle": {str(q): {"closed_form": o["closed_form"], "oracle": o["oracle"]}
                                 for q, o in oracles.items()}}


KERNEL_POINTS = [
    # (nu, x_z, y_z, x_w, y_w)
    (2.0, [0, 0, 0], [0.5, 0, 0], [0, 0, 0], [0.5, 0, 0]),
    (2.0, [0, 0, 0], [1.0, 0.3, 0.2], [0, 0, 0], [0.5, 0.1, 0.0]),
    (1.0, [0, 0, 0], [2.0, 1.0, 0.0], [0, 0, 0], [1.0, 0.0, 0.0]),
    (3.0, [0, 0, 0], [0.7, 0.0, 0.4], [0, 0, 0], [0.6, -0.2, 0.1]),
    (0.75, [0, 0, 0], [1.5, 0.5, -0.5], [0, 0, 0], [0.5, 0.0, 0.1]),
    (2.0, [0.3, 0.1, -0.2], [1.0, 0.2, 0.1], [0.0, 0.2, 0.1], [0.8, 0.1, 0.0]),
    (1.0, [0.5, -0.4, 0.3], [1.0, 0.0, 0.3], [0, 0, 0], [1.0, 0.0, 0.0]),
    (2.5, [1.0, 0.7, 0.0], [1.0, 0.5, 0.0], [0, 0, 0], [1.0, 0.0, 0.0]),
]


def c10_kernel():
    from .bergman import TubePoint, bergman_kernel, bergman_kernel_quad
    from .jordan import lightcone

    cone = lightcone(3)
    rows, worst = [], 0.0
    for nu, xz, yz, xw, yw in KERNEL_POINTS:
        z, w = TubePoint(xz, yz, cone), TubePoint(xw, yw, cone)
        a = bergman_kernel(cone, nu, z, w)
        b = bergman_kernel_quad(cone, nu, z, w)
        err = abs(a - b) / abs(a)
        worst = max(worst, err)
        rows.append({"nu": nu, "closed": [a.real, a.imag], "quad": [b.real, b.imag],
                     "rel_err": err})
    return worst < 1e-4, {"max_rel_err": worst, "rows": rows}


def c11_witness():
    from .bergman import counterexample_witness

    main = counterexample_witness(n=3, nu=1.5, p=2.0)
    flip = counterexample_witness(n=3, nu=1.5, p=2.0, log_exponent=2.0 / 2.0)
    ok = main.verdicts == ("Diverges", "Converges") and flip.verdicts[0] == "Converges"
    return ok, {"verdicts": list(main.verdicts), "flip_verdicts": list(flip.verdicts),
                "steps": main.steps}


def c12_besov():
    from .jordan import lightcone
    from .lattice import ShellRegion, generate_lattice, shell_box
    from .lp import BumpProfile, besov_seminorm, block_norms, build_filter_bank, make_grid

    _, _, _, _, spec = family_setup()
    cone = lightcone(3)
    # a wide shell keeps the dilated spectra away from the truncation edges
    La = generate_lattice(cone, ShellRegion(0.5, 64.0), seed=0)
    Lb = generate_lattice(cone, ShellRegion(0.5, 64.0), seed=1)
    center, half = shell_box(cone, La.region)
    grid = make_grid(cone, 1.05 * (np.abs(center) + half), 64, guard=1.0)
    banks = {
        "a": build_filter_bank(La, grid),
        "b": build_filter_bank(Lb, grid),
        "bump": build_filter_bank(La, grid, BumpProfile(1.0, 2.0, 3.0)),
        2: build_filter_bank(La, grid.dilate(2)),
        4: build_filter_bank(La, grid.dilate(4)),
    }
    params = [(0.5, 2.0, 2.0), (1.0, 4.0, 2.0)]
    ps = sorted({p for _, p, _ in params})
    norms = {}
    for i, member in enumerate(spec):
        f = member.sample(grid)
        for key, bank in banks.items():
            ff = f.dilate(key) if key in (2, 4) else f
            norms[i, key] = block_norms(ff, bank, ps)
    ok, out = True, []
    ts = np.log([1.0, 2.0, 4.0])
    for nu, p, q in params:
        def N(i, key):
            return besov_seminorm(None, banks[key], nu, p, q, norms=norms[i, key][p]).value
        lat_r = [N(i, "a") / N(i, "b") for i in range(len(spec))]
        bump_r = [N(i, "a") / N(i, "bump") for i in range(len(spec))]
        C = max(max(max(x, 1 / x) for x in lat_r), max(max(x, 1 / x) for x in bump_r))
        logs = np.array([[math.log(N(i, k)) for k in ("a", 2, 4)] for i in range(len(spec))])
        slopes = [float(np.polyfit(ts, row, 1)[0]) for row in logs]
        predicted = -(cone.dim / p + cone.rank * nu / q)
        worst = max(abs(s - predicted) / abs(predicted) for s in slopes)
        good = C < 20 and worst < 0.10
        ok &= good
        out.append({"nu": nu, "p": p, "q": q, "C": C, "predicted_exponent": predicted,
                    "slopes": slopes, "max_rel_exponent_err": worst, "ok": good})
    return bool(ok), {"params": out, "lattice_sizes": [len(La), len(Lb)]}


def c13_probe():
    from .lattice import lightcone_grid
    from .lp import lp_constant_probe

    _, _, _, bank, _ = family_setup()
    minkowski = lp_constant_probe(bank, p=3.0, s=1.0, trials=100, seed=0)
    plancherel = lp_constant_probe(bank, p=2.0, s=2.0, trials=100, seed=0)
    m_max = max(r["max_ratio"] for r in minkowski.shells)
    p_max = max(r["max_ratio"] for r in plancherel.shells)
    bound = math.sqrt(bank.overlap)
    report = lp_constant_probe(lightcone_grid(3, j_max=5), p=4.0, s=2.0, trials=100, seed=0)
    ok = m_max <= 1 + 1e-9 and p_max <= bound
    return ok, {"s1_max_ratio": m_max, "p2_max_ratio": p_max, "sqrt_overlap": bound,
                "p4_report": report.to_dict()}


CRITERIA = [
    (1, "gamma identity", c01_gamma, 60),
    (2, "Laplace transform of powers", c02_laplace, 120),
    (3, "Whitney lattices", c03_lattice, 120),
    (4, "light-cone grid", c04_lightcone_grid, 60),
    (5, "partition of unity and reconstruction", c05_partition, 60),
    (6, "wave operator consistency", c06_box, 60),
    (7, "integrability thresholds", c07_thresholds, 120),
    (8, "I_alpha scaling", c08_ialpha_scaling, 60),
    (9, "critical indices and region", c09_region, 10),
    (10, "Bergman kernel", c10_kernel, 120),
    (11, "counterexample witness", c11_witness, 60),
    (12, "Besov equivalence stability", c12_besov, 120),
    (13, "constant probes", c13_probe, 300),
]


def run_criterion(number: int) -> CriterionResult:
    for k, name, fn, budget in CRITERIA:
        if k == number:
            t0 = time.perf_counter()
            try:
                passed, detail = fn()
            except Exception as exc:  # report, never hide
                passed, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
            dt = time.perf_counter() - t0
            if dt > budget:
                detail["over_budget"] = True
            return CriterionResult(k, name, bool(passed) and dt <= budget, dt, budget, detail)
    raise KeyError(f"no criterion {number}")


def run_all(numbers=None, echo=None) -> list:
    out = []
    for k, *_ in CRITERIA:
        if numbers is None or k in numbers:
            res = run_criterion(k)
            if echo is not None:
                echo(res.line())
            out.append(res)
    return out
