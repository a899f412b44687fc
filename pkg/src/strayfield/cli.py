"""Command-line interface.

    strayfield bench --example 1 --n 10,20,30,40,50,60 --check
    strayfield energy --field 0,0,1 --ball 0.5 --nmax 10
    strayfield energy --cloud nodes.csv --nmax 8 --out energy.json
    strayfield basis-check --kmax 6
    strayfield closed-forms --point 0.3,-0.2,0.5

Exit codes: 0 success, 1 tolerance failure, 2 usage or configuration
error, 3 I/O error.
"""
import argparse
import csv
import io
import json
import logging
import sys

import numpy as np

from . import __version__, abbasis, bench, kernel, quadrature, solver, validation
from .quadrature import MagnetizationField, SampleDomain

log = logging.getLogger("strayfield")

EXIT_OK, EXIT_TOL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _floats(text, n=None, what="value"):
    try:
        vals = [float(v) for v in str(text).split(",")]
    except ValueError:
        raise UsageError(f"could not parse {what} {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    return vals


def _ints(text, what="list"):
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"could not parse {what} {text!r}") from None


def _g17(x):
    return format(float(x), ".17g")


# -- configuration -----------------------------------------------------------

DEFAULTS = {
    "bench": {"example": None, "n": "10,20,30,40,50,60", "mu0": 1.0, "format": "csv", "out": None, "check": False},
    "energy": {"nmax": 10, "mu0": 1.0, "format": "json", "out": None, "table": None,
               "example": None, "field": None, "cloud": None, "ball": None, "box": None},
    "basis-check": {"kmax": 4, "points": 100, "seed": 0},
    "closed-forms": {"point": None},
}
QUAD_KEYS = ("quad_radial", "quad_theta", "quad_phi", "quad_axis")


def resolve_config(args):
    """Defaults, then the JSON config file, then explicit flags."""
    cfg = dict(DEFAULTS[args.command])
    for key in QUAD_KEYS:
        cfg.setdefault(key, None)
    cfg["backend"] = None
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                from_file = json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(from_file, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(k.replace("-", "_") for k in from_file) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update({k.replace("-", "_"): v for k, v in from_file.items()})
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            cfg[key] = val
    return cfg


def _policy_rule(domain, n_max, cfg):
    """Rule from the resolution policy, with per-axis overrides applied."""
    policy = quadrature.DEFAULT_POLICY
    if domain.kind == "ball":
        nr, nt, nph = policy.ball_counts(n_max)
        nr = cfg["quad_radial"] or nr
        nt = cfg["quad_theta"] or nt
        nph = cfg["quad_phi"] or nph
        return quadrature.build_ball_rule(domain, nr, nt, nph)
    if cfg["quad_axis"]:
        return quadrature.build_box_rule(domain, cfg["quad_axis"])
    return policy.rule_for(domain, n_max)


def _check_quad(cfg):
    for key in QUAD_KEYS:
        if cfg[key] is not None and int(cfg[key]) < 2:
            raise UsageError(f"--{key.replace('_', '-')} must be at least 2")


# -- output ------------------------------------------------------------------

def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv_text(config, header, rows):
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, (int, str)) else _g17(v) for v in row])
    return buf.getvalue()


def _json_text(doc):
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


# -- commands ----------------------------------------------------------------

def cmd_bench(cfg):
    if cfg["example"] is None:
        raise UsageError("bench needs --example {1,2,3}")
    try:
        case = bench.get_case(cfg["example"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    n_list = _ints(cfg["n"], "--n")
    if not n_list or any(n < 0 for n in n_list) or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise UsageError("--n must be a non-empty ascending list of non-negative integers")
    _check_quad(cfg)
    n_max = n_list[-1]
    rule = _policy_rule(case.domain, n_max, cfg)
    table = solver.compute_table(case.field, rule, n_max, mu0=float(cfg["mu0"]), backend=cfg["backend"])
    exact = case.exact_energy * float(cfg["mu0"])
    rows = bench.convergence_rows(table, exact, n_list)
    resolved = {
        "command": "bench", "example": case.id, "n": n_list, "mu0": float(cfg["mu0"]),
        "quadrature": dict(rule.resolution), "nodes": len(rule),
    }
    slopes = {}
    positive = [r for r in rows if r.N > 0 and r.rel_energy_err > 0]
    if len(positive) >= 3:
        slopes["energy"] = bench.fit_log_slope([r.N for r in positive], [r.rel_energy_err for r in positive])
        slopes["e0"] = bench.fit_log_slope([r.N for r in positive], [r.e0 for r in positive])

    checks = []
    if cfg["check"]:
        if float(cfg["mu0"]) != 1.0:
            raise UsageError("--check compares against tables computed with mu0 = 1")
        checks = bench.check_against_reference(case, rows)

    if cfg["format"] == "json":
        doc = {
            "config": resolved,
            "exact_energy": exact,
            "rows": [dict(zip(("N", "E_N", "rel_energy_err", "e0"), r.as_tuple())) for r in rows],
            "slopes": slopes,
        }
        if cfg["check"]:
            doc["checks"] = [{"name": c.name, "value": c.value, "target": c.target, "tol": c.tol, "ok": c.ok}
                             for c in checks]
        text = _json_text(doc)
    else:
        text = _csv_text(resolved, ["N", "E_N", "rel_energy_err", "e0"], [r.as_tuple() for r in rows])
    _emit(text, cfg["out"])

    if cfg["out"] not in (None, "-"):
        print(f"example {case.id}: {case.name}, exact energy {exact:.8f}, {len(rule)} nodes")
        print(f"{'N':>4}  {'E_N':>10}  {'rel.err':>9}  {'e0':>9}")
        for r in rows:
            print(f"{r.N:>4}  {r.E_N:.8f}  {r.rel_energy_err:9.2e}  {r.e0:9.2e}")
        for k, v in slopes.items():
            print(f"log slope ({k}): {v:.2f}")
    failed = [c for c in checks if not c.ok]
    if cfg["check"]:
        report = {"status": "fail" if failed else "pass",
                  "failures": [{"name": c.name, "value": c.value, "target": c.target, "tol": c.tol} for c in failed]}
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
    return EXIT_TOL if failed else EXIT_OK


def _energy_problem(cfg):
    specs = [k for k in ("example", "field", "cloud") if cfg[k] is not None]
    if len(specs) != 1:
        raise UsageError("give exactly one of --example, --field, --cloud")
    if cfg["example"] is not None:
        try:
            case = bench.get_case(cfg["example"])
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return case.domain, case.field, None
    if cfg["cloud"] is not None:
        try:
            rule, fld = quadrature.load_cloud(cfg["cloud"])
        except quadrature.CloudFormatError as exc:
            raise UsageError(str(exc)) from None
        return rule.domain, fld, rule
    vec = _floats(cfg["field"], 3, "--field")
    if (cfg["ball"] is None) == (cfg["box"] is None):
        raise UsageError("--field needs exactly one of --ball R or --box x0,y0,z0,x1,y1,z1")
    try:
        if cfg["ball"] is not None:
            domain = SampleDomain.ball(float(cfg["ball"]))
        else:
            b = _floats(cfg["box"], 6, "--box")
            domain = SampleDomain.box(b[:3], b[3:])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return domain, MagnetizationField.constant(vec), None


def cmd_energy(cfg):
    n_max = int(cfg["nmax"])
    if n_max < 0:
        raise UsageError("--nmax must be non-negative")
    _check_quad(cfg)
    domain, fld, rule = _energy_problem(cfg)
    if rule is None:
        rule = _policy_rule(domain, n_max, cfg)
    mu0 = float(cfg["mu0"])
    table = solver.compute_table(fld, rule, n_max, mu0=mu0, backend=cfg["backend"])
    brk = solver.energy_breakdown(table)
    resolved = {
        "command": "energy", "nmax": n_max, "mu0": mu0, "domain": domain.describe(),
        "field": cfg["field"] if cfg["field"] is not None else (
            f"example {cfg['example']}" if cfg["example"] is not None else f"cloud {cfg['cloud']}"),
        "quadrature": dict(rule.resolution), "nodes": len(rule),
    }
    if cfg["table"]:
        _emit(table.to_json(extra=resolved) + "\n", cfg["table"])
    if cfg["format"] == "csv":
        text = _csv_text(resolved, ["N", "per_degree", "E_N"],
                         [(n, p, e) for n, (p, e) in enumerate(zip(brk.per_degree, brk.cumulative))])
    else:
        doc = {"config": resolved, "per_degree": brk.per_degree, "cumulative": brk.cumulative,
               "E_N": brk.cumulative[-1]}
        text = _json_text(doc)
    _emit(text, cfg["out"])
    if cfg["out"] not in (None, "-"):
        print(f"E_{n_max} = {brk.cumulative[-1]:.8f}  ({len(rule)} nodes)")
    return EXIT_OK


def cmd_basis_check(cfg):
    kmax = int(cfg["kmax"])
    if kmax < 0:
        raise UsageError("--kmax must be non-negative")
    rep = validation.run_basis_check(kmax=kmax, n_points=int(cfg["points"]), seed=int(cfg["seed"]))
    for line in rep.lines:
        print(line)
    if rep.failures:
        flagged = sorted({a for _, a, _ in rep.failures if a is not None})
        print("FAILED for alpha: " + ", ".join(str(a) for a in flagged))
        return EXIT_TOL
    print("all basis checks passed")
    return EXIT_OK


def cmd_closed_forms(cfg):
    points = cfg["point"] or ["0.3,-0.2,0.5"]
    for p in points:
        x = np.array(_floats(p, 3, "--point"))
        print(f"x = ({x[0]}, {x[1]}, {x[2]})")
        for alpha, (label, _) in sorted(abbasis.CLOSED_FORMS.items()):
            cf = float(abbasis.closed_form(alpha, x))
            w = abbasis.w_alpha(alpha, x)
            print(f"  {str(alpha):<12} {label:<42} {cf: .17g}  w_alpha {w: .17g}  diff {abs(cf - w):.1e}")
    return EXIT_OK


COMMANDS = {"bench": cmd_bench, "energy": cmd_energy, "basis-check": cmd_basis_check,
            "closed-forms": cmd_closed_forms}


def build_parser():
    p = argparse.ArgumentParser(prog="strayfield", description="Stray-field energy with rational orthogonal bases.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--config", help="JSON file with option values (flags win)")
        if out:
            sp.add_argument("--out", help="output path (default: stdout)")
            sp.add_argument("--format", choices=("csv", "json"))
            sp.add_argument("--mu0", type=float)
            sp.add_argument("--quad-radial", type=int, dest="quad_radial")
            sp.add_argument("--quad-theta", type=int, dest="quad_theta")
            sp.add_argument("--quad-phi", type=int, dest="quad_phi")
            sp.add_argument("--quad-axis", type=int, dest="quad_axis")
            sp.add_argument("--backend", choices=kernel.available_backends())

    b = sub.add_parser("bench", help="convergence table for a built-in example")
    common(b)
    b.add_argument("--example", type=int)
    b.add_argument("--n", help="comma-separated ascending degrees")
    b.add_argument("--check", action="store_true", help="compare with the published table")

    e = sub.add_parser("energy", help="energy of a user-specified problem")
    common(e)
    e.add_argument("--nmax", type=int)
    e.add_argument("--example", type=int)
    e.add_argument("--field", help="constant magnetization Mx,My,Mz")
    e.add_argument("--ball", type=float, help="ball radius (centered at the origin)")
    e.add_argument("--box", help="box corners x0,y0,z0,x1,y1,z1")
    e.add_argument("--cloud", help="CSV with x,y,z,weight,Mx,My,Mz")
    e.add_argument("--table", help="also write the coefficient table JSON here")

    c = sub.add_parser("basis-check", help="closed forms, orthogonality and eigen-relation checks")
    common(c, out=False)
    c.add_argument("--kmax", type=int)
    c.add_argument("--points", type=int)
    c.add_argument("--seed", type=int)

    d = sub.add_parser("closed-forms", help="print the k <= 2 closed forms next to w_alpha")
    common(d, out=False)
    d.add_argument("--point", action="append", help="x,y,z (repeatable)")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"strayfield: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"strayfield: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"strayfield: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
