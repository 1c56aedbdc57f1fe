"""Command-line front end.

Usage: ``conelp [--config FILE] [--threads N] [--out PATH] <group> <command> ...``

Exit codes: 0 success, 1 verification failure (a JSON failure list goes to
stderr), 2 usage or configuration error.  Heavy modules are imported after
argument parsing so that ``--threads`` can cap BLAS/OpenMP pools first.
"""
from __future__ import annotations

import argparse
import configparser
import copy
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

__all__ = ["main", "DEFAULTS", "load_config", "ConfigError", "dumps", "fmt_float"]

CONFIG_ENV = "CONELP_CONFIG"

# every accepted key with its default; the type of the default is the parse type
DEFAULTS = {
    "cone": {"name": "lightcone3"},
    "lattice": {"delta": 0.5, "R": 2.0, "lo": 1.0, "hi": 8.0, "seed": 0, "samples": 100_000},
    "grid": {"shape": 64, "guard": 2.0, "memory_cap": 1 << 24},
    "quadrature": {"scheme": "gaussian", "truncation_lo": -4.5, "truncation_hi": 3.0,
                   "nodes": "", "tol": 1e-8},
    "norm": {"nu": 0.5, "p": 2.0, "q": 2.0},
    "output": {"directory": ".", "prefix": "conelp"},
    "tolerance": {"gamma": 1e-6, "laplace": 1e-5, "partition": 1e-10,
                  "reconstruction": 1e-8, "kernel": 1e-4, "ialpha": 1e-2, "box_order": 1.8},
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

def _cast(section, key, text):
    default = DEFAULTS[section][key]
    try:
        if isinstance(default, bool):
            return text.strip().lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {text!r}") from None
    return text.strip()


def load_config(path=None) -> dict:
    """Defaults overlaid with an INI-style file; unknown sections or keys are errors."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is None:
        return cfg
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive (R)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    for section in parser.sections():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section [{section}]")
        for key, text in parser.items(section):
            if key not in DEFAULTS[section]:
                raise ConfigError(f"unknown config key [{section}] {key}")
            cfg[section][key] = _cast(section, key, text)
    return cfg


# ---------------------------------------------------------------------------
# deterministic output
# ---------------------------------------------------------------------------

def fmt_float(x: float) -> str:
    return "%.17g" % x


def _plain(obj):
    """Convert numpy scalars/arrays, fractions and tuples to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, Fraction):
        return int(obj) if obj.denominator == 1 else str(obj)
    if hasattr(obj, "tolist") and not isinstance(obj, (str, bytes)):
        return _plain(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isnan(obj):
            return "null"
        if math.isinf(obj):
            return '"inf"' if obj > 0 else '"-inf"'
        return fmt_float(obj)
    if isinstance(obj, str):
        import json
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_encode(str(k), indent, level + 1)}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON with every float written as ``%.17g`` (byte-stable across runs)."""
    return _encode(_plain(obj), indent, 0) + "\n"


def csv_text(header, rows) -> str:
    def cell(v):
        if isinstance(v, float):
            return fmt_float(v)
        if isinstance(v, (list, tuple)):
            return ";".join(cell(x) for x in v)
        return str(v)
    lines = [",".join(header)]
    lines += [",".join(cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _vec(text):
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _pair_int(text):
    v = _vec(text)
    if len(v) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated integers")
    return int(v[0]), int(v[1])


def _number(text):
    """Float or exact fraction ``a/b``; ``inf`` allowed."""
    text = str(text).strip()
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


# ---------------------------------------------------------------------------
# shared builders
# ---------------------------------------------------------------------------

def _cone(args, cfg):
    from .jordan import parse_cone
    return parse_cone(getattr(args, "cone", None) or cfg["cone"]["name"])


def _quad_spec(cfg):
    from .quadrature import QuadratureSpec
    q = cfg["quadrature"]
    nodes = tuple(int(v) for v in _vec(q["nodes"])) if q["nodes"] else None
    return QuadratureSpec(q["scheme"], (q["truncation_lo"], q["truncation_hi"]), nodes, q["tol"])


def _lattice(args, cfg, cone=None):
    from .lattice import Lattice, ShellRegion, generate_lattice
    if getattr(args, "input", None):
        return Lattice.load(args.input)
    L = cfg["lattice"]
    cone = cone or _cone(args, cfg)
    return generate_lattice(cone, ShellRegion(L["lo"], L["hi"]), L["delta"], L["R"], L["seed"])


def _bank(args, cfg):
    import numpy as np
    from .lattice import shell_box
    from .lp import build_filter_bank, make_grid
    lat = _lattice(args, cfg)
    center, half = shell_box(lat.cone, lat.region)
    grid = make_grid(lat.cone, np.abs(center) + half, cfg["grid"]["shape"], cfg["grid"]["guard"])
    return lat, grid, build_filter_bank(lat, grid)


def _fields(args, cfg, bank, grid):
    """Input field from ``--field`` or the seeded test family."""
    from .lp import GridField, family_spec
    if getattr(args, "field", None):
        return [("input", GridField.load(args.field))]
    spec = family_spec(bank, grid, seed=cfg["lattice"]["seed"])
    return [(f"family{i}", m.sample(grid)) for i, m in enumerate(spec)]


def _save_field(args, cfg, f, name):
    out = Path(cfg["output"]["directory"])
    out.mkdir(parents=True, exist_ok=True)
    binp, jsonp = f.save(out / f"{cfg['output']['prefix']}_{name}")
    return {"bin": str(binp), "json": str(jsonp)}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_lattice(args, cfg):
    from .lattice import dual_lattice, verify_lattice
    if args.action == "gen" and args.input:
        raise ConfigError("lattice gen builds from the config; use verify or dual with --input")
    if args.action != "gen" and not args.input:
        raise ConfigError(f"lattice {args.action} needs --input")
    lat = _lattice(args, cfg)
    if args.action == "dual":
        lat = dual_lattice(lat)
    rep = verify_lattice(lat, samples=cfg["lattice"]["samples"], seed=cfg["lattice"]["seed"] + 1)
    doc = {
        "lattice": {"cone": lat.cone.name, "delta": lat.delta, "R": lat.R,
                    "region": lat.region.to_dict(), "points": lat.points},
        "report": rep.to_dict(),
    }
    if args.save:
        Path(args.save).write_text(dumps(doc["lattice"]))
    _emit(args, dumps(doc))
    failures = []
    if not rep.separation_ok:
        failures.append({"check": "separation", "min_distance": rep.min_distance,
                         "required": 2 * lat.delta})
    if rep.covering_failures:
        failures.append({"check": "covering", "failures": rep.covering_failures})
    return failures


def cmd_grid(args, cfg):
    from .lattice import lightcone_grid, verify_nesting
    g = lightcone_grid(args.n, args.ell, args.jmax, seed=cfg["lattice"]["seed"])
    rep = verify_nesting(g, samples=args.samples, seed=cfg["lattice"]["seed"])
    _emit(args, dumps({"grid": g.to_dict(), "report": rep.to_dict()}))
    failures = []
    if rep.scale_spread > 0.05:
        failures.append({"check": "scale_spread", "value": rep.scale_spread, "limit": 0.05})
    if not 0.5 <= rep.j_ratio <= 2.0:
        failures.append({"check": "j_ratio", "value": rep.j_ratio, "limit": [0.5, 2.0]})
    return failures


def cmd_quad(args, cfg):
    import numpy as np
    from . import quadrature as Q
    tol = cfg["tolerance"]
    failures = []
    if args.action == "gamma":
        cone = _cone(args, cfg)
        exact = Q.gamma_omega(cone, args.s)
        res = Q.gamma_omega_quad(cone, args.s, _quad_spec(cfg))
        err = abs(res.value - exact) / exact
        rows = [(cone.name, args.s, exact, res.value, err)]
        text = csv_text(["cone", "s", "closed_form", "quadrature", "rel_err"], rows)
        if err >= tol["gamma"]:
            failures.append({"check": "gamma", "rel_err": err, "tol": tol["gamma"]})
    elif args.action == "laplace":
        cone = _cone(args, cfg)
        y = np.asarray(args.y if args.y else cone.identity, float)
        exact = Q.laplace_power(cone, y, args.s)
        res = Q.laplace_power_quad(cone, y, args.s, _quad_spec(cfg))
        err = abs(res.value - exact) / abs(exact)
        rows = [(cone.name, y.tolist(), args.s, exact, res.value, err)]
        text = csv_text(["cone", "y", "s", "closed_form", "quadrature", "rel_err"], rows)
        if err >= tol["laplace"]:
            failures.append({"check": "laplace", "rel_err": err, "tol": tol["laplace"]})
    elif args.action == "ialpha":
        from .jordan import lightcone
        cone = lightcone(args.n)
        y = np.asarray(args.y if args.y else cone.identity, float)
        # panels of unit 3 at e and y_1-adapted panels at y: distinct node sets
        value = Q.i_alpha(cone, args.alpha, y)
        at_e = Q.i_alpha(cone, args.alpha, panel_scale=3.0)
        # invariance under the automorphism group leaves only the determinant
        scaled = at_e * float(cone.det(y)) ** (cone.n_over_r - args.alpha)
        err = abs(value - scaled) / abs(scaled)
        rows = [(args.n, args.alpha, y.tolist(), value, scaled, err)]
        text = csv_text(["n", "alpha", "y", "quadrature", "homogeneity_prediction", "rel_err"], rows)
        if err >= tol["ialpha"]:
            failures.append({"check": "ialpha_homogeneity", "rel_err": err, "tol": tol["ialpha"]})
    else:
        params = {}
        for item in args.param or []:
            key, _, val = item.partition("=")
            if not _:
                raise ConfigError(f"--param expects key=value, got {item!r}")
            params[key.strip()] = float(val)
        v = Q.divergence_probe(args.family, params)
        rows = [(args.family, ";".join(f"{k}={fmt_float(x)}" for k, x in params.items()),
                 v.verdict, v.rel_increment)]
        text = csv_text(["family", "params", "verdict", "rel_increment"], rows)
    _emit(args, text)
    return failures


def cmd_lp(args, cfg):
    import numpy as np
    from . import lp
    tol = cfg["tolerance"]
    lp.MEMORY_CAP = int(cfg["grid"]["memory_cap"])
    failures = []
    if args.action == "probe-constant":
        if args.mode == "lightcone":
            from .lattice import lightcone_grid
            src = lightcone_grid(3, j_max=args.jmax, seed=cfg["lattice"]["seed"])
        else:
            src = _bank(args, cfg)[2]
        rep = lp.lp_constant_probe(src, args.p, args.s, args.mu, args.trials, cfg["lattice"]["seed"])
        _emit(args, dumps(rep.to_dict()))
        if rep.bounded is False:
            failures.append({"check": "guaranteed_bound", "growth_exponent": rep.growth_exponent})
        return failures
    if args.action in ("box", "mihlin") and not args.field:
        from .acceptance import BOX_AMPS, BOX_FREQS
        from .jordan import lightcone
        grid = lp.make_grid(lightcone(3), 1.0, cfg["grid"]["shape"])
        f = lp.plane_wave_field(grid, BOX_FREQS, BOX_AMPS)
    elif args.action in ("box", "mihlin"):
        f = lp.GridField.load(args.field)
    if args.action == "box":
        out = lp.box_power(f, args.beta)
        doc = {"beta": args.beta, "input_norm": lp.lp_norm(f, 2), "output_norm": lp.lp_norm(out, 2)}
        if args.beta == 1 and not args.field:
            from .acceptance import box_convergence
            errs, orders = box_convergence()
            doc["finite_difference"] = {"errors": errs, "orders": orders}
            if min(orders) < tol["box_order"]:
                failures.append({"check": "box_order", "orders": orders})
        try:
            back = lp.box_power(out, -args.beta)
            doc["round_trip_error"] = float(np.linalg.norm(back.samples - f.samples)
                                            / np.linalg.norm(f.samples))
        except ValueError as exc:
            doc["round_trip_error"] = None
            doc["round_trip_note"] = str(exc)
        if args.bernstein:
            doc["bernstein"] = [lp.bernstein_check(m) for m in (1, 2)]
            failures += [{"check": "bernstein", "m": b["m"], "variance": b["ratio_variance"]}
                         for b in doc["bernstein"] if b["ratio_variance"] >= 1e-8]
        if args.save:
            doc["saved"] = _save_field(args, cfg, out, "box")
        _emit(args, dumps(doc))
        return failures
    if args.action == "mihlin":
        tau = args.tau
        out = lp.mihlin_apply(f, lambda lam: lam ** (1j * tau))
        back = lp.mihlin_apply(out, lambda lam: lam ** (-1j * tau))
        err = float(np.linalg.norm(back.samples - f.samples) / np.linalg.norm(f.samples))
        doc = {"tau": tau, "input_norm": lp.lp_norm(f, 2), "output_norm": lp.lp_norm(out, 2),
               "round_trip_error": err}
        if args.save:
            doc["saved"] = _save_field(args, cfg, out, "mihlin")
        _emit(args, dumps(doc))
        if err > 1e-10:
            failures.append({"check": "mihlin_round_trip", "error": err})
        return failures
    lat, grid, bank = _bank(args, cfg)
    info = {"lattice_size": len(lat), "overlap": bank.overlap, "shape": list(grid.shape),
            "spacing": grid.spacing}
    if args.action == "bank":
        part = lp.partition_error(bank, seed=cfg["lattice"]["seed"])
        _emit(args, dumps({"bank": info, "partition_error": part}))
        worst = max(part["grid"], part["samples"])
        if worst >= tol["partition"]:
            failures.append({"check": "partition", "error": worst, "tol": tol["partition"]})
        return failures
    fields = _fields(args, cfg, bank, grid)
    rows = []
    for name, f in fields:
        if args.action == "reconstruct":
            total = sum(b.samples for b in lp.lp_blocks(f, bank))
            err = float(np.linalg.norm(total - f.samples) / np.linalg.norm(f.samples))
            rows.append({"field": name, "rel_err": err})
            if err >= tol["reconstruction"]:
                failures.append({"check": "reconstruction", "field": name, "rel_err": err})
        else:
            n = cfg["norm"]
            res = lp.besov_seminorm(f, bank, n["nu"], n["p"], n["q"])
            rows.append({"field": name, "nu": n["nu"], "p": n["p"], "q": n["q"],
                         "seminorm": res.value, "terms": res.terms})
        if args.save:
            rows[-1]["saved"] = _save_field(args, cfg, f, name)
    _emit(args, dumps({"bank": info, "fields": rows}))
    return failures


def cmd_bergman(args, cfg):
    from . import bergman as B
    if args.action == "indices":
        _emit(args, dumps(B.critical_indices(args.n, args.r, args.nu, args.p).to_dict()))
        return []
    if args.action == "classify":
        v = B.classify_region(args.n, args.r, args.nu, args.p, args.q, args.appendix)
        doc = dict(B.critical_indices(args.n, args.r, args.nu, args.p).to_dict())
        doc.update(v.to_dict())
        _emit(args, dumps(doc))
        return []
    if args.action == "region-plot":
        svg = B.region_svg(args.n, args.r, args.nu, args.steps, args.appendix)
        if args.csv:
            Path(args.csv).write_text(B.region_csv(B.region_rows(args.n, args.r, args.nu,
                                                                 args.steps, args.appendix)))
        _emit(args, svg)
        return []
    if args.action == "kernel":
        import numpy as np
        cone = _cone(args, cfg)
        zero = np.zeros(cone.dim)
        z = B.TubePoint(args.xz or zero, args.yz or cone.identity, cone)
        w = B.TubePoint(args.xw or zero, args.yw or cone.identity, cone)
        a = B.bergman_kernel(cone, args.nu, z, w)
        b = B.bergman_kernel_quad(cone, args.nu, z, w)
        err = abs(a - b) / abs(a)
        _emit(args, dumps({"cone": cone.name, "nu": args.nu, "closed_form": a, "quadrature": b,
                           "rel_err": err}))
        tol = cfg["tolerance"]["kernel"]
        return [] if err < tol else [{"check": "kernel", "rel_err": err, "tol": tol}]
    rep = B.counterexample_witness(args.n, args.nu, args.p, log_exponent=args.log_exponent)
    _emit(args, dumps(rep.to_dict()))
    if args.log_exponent is None and tuple(rep.verdicts) != ("Diverges", "Converges"):
        return [{"check": "witness", "verdicts": list(rep.verdicts)}]
    return []


def cmd_selftest(args, cfg):
    from .acceptance import run_all
    only = None if not args.only else [int(v) for v in _vec(args.only)]
    results = run_all(only, echo=lambda line: print(line, file=sys.stderr, flush=True))
    _emit(args, dumps({"results": [r.to_dict() for r in results],
                       "passed": all(r.passed for r in results)}))
    return [{"criterion": r.number, "name": r.name, "seconds": r.seconds}
            for r in results if not r.passed]


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conelp", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help=f"INI config file (default: ${CONFIG_ENV})")
    ap.add_argument("--threads", type=int, help="cap worker threads of numerical libraries")
    ap.add_argument("--out", help="write the main output here instead of stdout")
    sub = ap.add_subparsers(dest="group", required=True)

    p = sub.add_parser("lattice", help="generate, verify or dualize a Whitney lattice")
    p.add_argument("action", choices=["gen", "verify", "dual"])
    p.add_argument("--cone")
    p.add_argument("--input", help="lattice JSON (verify, dual)")
    p.add_argument("--save", help="also write the lattice JSON here")
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("grid", help="explicit dyadic light-cone grid")
    p.add_argument("action", choices=["lightcone"])
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--ell", type=_pair_int, default=(0, 2), help="lo,hi")
    p.add_argument("--jmax", type=int, default=3)
    p.add_argument("--samples", type=int, default=20_000)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("quad", help="cone quadrature against closed forms")
    p.add_argument("action", choices=["gamma", "laplace", "ialpha", "probe"])
    p.add_argument("--cone")
    p.add_argument("--s", type=_vec)
    p.add_argument("--y", type=_vec)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--alpha", type=float, default=3.0)
    p.add_argument("--family", choices=["log_lemma", "log2_lemma", "i_alpha"], default="log_lemma")
    p.add_argument("--param", action="append", help="key=value, repeatable")
    p.set_defaults(func=cmd_quad)

    p = sub.add_parser("lp", help="Littlewood-Paley banks, norms and multipliers")
    p.add_argument("action", choices=["bank", "reconstruct", "besov", "box", "mihlin",
                                      "probe-constant"])
    p.add_argument("--cone")
    p.add_argument("--input", help="lattice JSON")
    p.add_argument("--field", help="GridField path (.bin/.json pair)")
    p.add_argument("--save", action="store_true", help="write fields to [output] directory")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--bernstein", action="store_true")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--p", type=float, default=4.0)
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--mode", choices=["bank", "lightcone"], default="bank")
    p.add_argument("--jmax", type=int, default=5)
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("bergman", help="critical indices, region, kernel, witness")
    p.add_argument("action", choices=["indices", "classify", "kernel", "witness", "region-plot"])
    p.add_argument("--cone")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--nu", type=_number, default=Fraction(3, 2))
    p.add_argument("--p", type=_number, default=Fraction(2))
    p.add_argument("--q", type=_number, default=Fraction(2))
    p.add_argument("--appendix", action="store_true", help="allow the n=3 bilinear extension")
    p.add_argument("--steps", type=int, default=48)
    p.add_argument("--csv", help="region-plot: also write the verdict grid as CSV")
    p.add_argument("--xz", type=_vec)
    p.add_argument("--yz", type=_vec)
    p.add_argument("--xw", type=_vec)
    p.add_argument("--yw", type=_vec)
    p.add_argument("--log-exponent", type=float)
    p.set_defaults(func=cmd_bergman)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.set_defaults(func=cmd_selftest)
    return ap


def _set_threads(n):
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ[var] = str(n)


def _coerce(args):
    # float-valued paths outside the exact rational classifier
    if args.group == "bergman" and args.action in ("kernel", "witness"):
        args.nu = float(args.nu)
        args.p = float(args.p)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return 2
        _set_threads(args.threads)
    _coerce(args)
    try:
        cfg = load_config(args.config or os.environ.get(CONFIG_ENV) or None)
        failures = args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, IndexError, OSError, NotImplementedError, MemoryError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if failures:
        sys.stderr.write(dumps({"failures": failures}))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
