"""Command-line front end.

Angles are degrees on the command line and radians everywhere inside the
library.  Heights and radii are reduced by the inner radius a; energies and
forces are reduced by the scale printed in the JSON ``meta`` block.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import shlex
import sys
from typing import Iterable, Iterator

import numpy as np

from . import __version__
from . import analysis as an
from . import closed_forms as cf
from .bodies import body_quadrature
from .closed_forms import BodyGeometry
from .kernel import PolarizabilityTensor
from .quadrature import QuadratureError, Tolerances
from .verify import VerifyContext, run_checks

CSV_HEADER = ["h_hat", "theta_deg", "b_hat", "energy_reduced", "force_reduced", "e_iso", "e_aniso", "flags"]
DELTA_HEADER = ["h_hat", "b_hat", "delta_energy_reduced", "flags"]

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

COMMANDS = ("energy", "force", "delta-e", "torsion-free", "repulsion", "critical-angles",
            "critical-radius", "cycle", "verify")


class UsageError(ValueError):
    pass


def fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x) + 0.0, ".17g")  # + 0.0 folds -0 into 0


def finite_or_none(x):
    return None if x is None or not math.isfinite(x) else float(x)


# --- argument handling ----------------------------------------------------------

def read_config(path: str) -> list[str]:
    """Flat ``key = value`` file -> argv tokens (``--key value ...``)."""
    tokens = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            tokens.append("--" + key.lstrip("-").replace("_", "-"))
            tokens.extend(shlex.split(value))
    return tokens


def expand_config(argv: list[str]) -> list[str]:
    # config tokens go right after the subcommand so explicit flags win
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a file name")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2:]
    at = next((k + 1 for k, tok in enumerate(rest) if tok in COMMANDS), len(rest))
    return rest[:at] + read_config(path) + rest[at:]


def add_body_args(p: argparse.ArgumentParser, default_pol: str = "axial", pols=None):
    p.add_argument("--body", choices=["ring", "annulus", "plate"], default="ring")
    p.add_argument("--pol", choices=pols or ["axial", "radial", "azimuthal", "isotropic", "tensor"],
                   default=default_pol, help="polarization pattern of the body")
    p.add_argument("--b", type=float, default=None, help="reduced outer radius b/a (annulus only)")
    p.add_argument("--tensor", default=None,
                   help="constant body tensor 'xx,yy,zz,xy,xz,yz' for --pol tensor")


def add_tol_args(p: argparse.ArgumentParser):
    p.add_argument("--rel-tol", type=float, default=1e-9)
    p.add_argument("--abs-tol", type=float, default=1e-12)


def add_height_args(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--h", type=float, nargs="+", help="reduced heights h/a")
    g.add_argument("--h-range", type=float, nargs=3, metavar=("MIN", "MAX", "COUNT"))


def geometry_from_args(args) -> BodyGeometry:
    tensor = None
    pol = args.pol
    if pol == "isotropic":
        pol, tensor = "tensor", PolarizabilityTensor.isotropic()
    elif pol == "tensor":
        if not args.tensor:
            raise UsageError("--pol tensor needs --tensor xx,yy,zz,xy,xz,yz")
        parts = [float(x) for x in args.tensor.split(",")]
        if len(parts) != 6:
            raise UsageError("--tensor takes six comma-separated components")
        tensor = PolarizabilityTensor.from_components(*parts)
    if args.body == "annulus":
        if args.b is None:
            raise UsageError("--body annulus needs --b")
        if args.b == 1.0:
            return BodyGeometry("ring", pol, None, tensor)
    elif args.b is not None:
        raise UsageError("--b only applies to --body annulus")
    try:
        return BodyGeometry(args.body, pol, args.b, tensor)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def heights_from_args(args) -> np.ndarray:
    if args.h_range:
        lo, hi, count = args.h_range
        if count < 2 or not count.is_integer() or not lo < hi:
            raise UsageError("--h-range needs MIN < MAX and integer COUNT >= 2")
        return np.linspace(lo, hi, int(count))
    return np.asarray(args.h if args.h else [0.0], dtype=float)


def tolerances_from_args(args) -> Tolerances:
    try:
        return Tolerances(args.rel_tol, args.abs_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def meta(geometry: BodyGeometry | None = None, tol: Tolerances | None = None) -> dict:
    out = {"version": __version__,
           "units": "reduced: lengths / a, angles in degrees, energies / energy_scale"}
    if tol is not None:
        out["tolerances"] = {"rel": tol.rel, "abs": tol.abs}
    if geometry is None:
        out["energy_scale"] = {"ring": cf.RING_ENERGY_SCALE, "disc": cf.DISC_ENERGY_SCALE}
    else:
        out["energy_scale"] = geometry.energy_scale
    return out


def geometry_inputs(g: BodyGeometry) -> dict:
    d = {"body": g.kind, "pol": g.polarization, "b_hat": g.b_hat}
    if g.tensor is not None:
        d["tensor"] = np.asarray(g.tensor).tolist()
    return d


def jsonable(v):
    """Plain JSON types; non-finite floats become null."""
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, (bool, str)) or v is None:
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    return finite_or_none(float(v))


def report(command: str, inputs: dict, results, flags: Iterable[str], meta_block: dict) -> dict:
    return {"command": command, "inputs": inputs, "results": results,
            "flags": sorted(set(flags)), "meta": meta_block}


def emit_json(obj: dict, out):
    json.dump(obj, out, indent=2, allow_nan=False)
    out.write("\n")


# --- energy / force -----------------------------------------------------------

def evaluate(geometry: BodyGeometry, h: float, theta_deg: float, tol: Tolerances) -> dict:
    t = math.radians(theta_deg)
    rec = {"h_hat": float(h), "theta_deg": float(theta_deg),
           "b_hat": geometry.b_hat, "flags": []}
    if geometry.has_closed_form:
        d = cf.decompose(geometry, h)
        cfg = cf.AtomConfiguration(h, t)
        rec.update(energy_reduced=cf.energy(geometry, cfg), force_reduced=cf.force(geometry, cfg),
                   e_iso=d.e_iso, e_aniso=d.e_aniso)
        return rec
    e = body_quadrature(geometry, h, t, tol)
    f = body_quadrature(geometry, h, t, tol, quantity="force")
    e0 = body_quadrature(geometry, h, 0.0, tol)
    e90 = body_quadrature(geometry, h, math.pi / 2, tol)
    rec.update(energy_reduced=e.value, force_reduced=f.value,
               e_iso=0.5 * (e0.value + e90.value), e_aniso=0.5 * (e0.value - e90.value),
               flags=[an.QUADRATURE],
               error_estimates={"energy": e.error_estimate, "force": f.error_estimate,
                                "e_iso": 0.5 * (e0.error_estimate + e90.error_estimate),
                                "e_aniso": 0.5 * (e0.error_estimate + e90.error_estimate)})
    return rec


def records(geometry, heights, thetas, tol) -> Iterator[dict]:
    for theta in thetas:
        for h in heights:
            yield evaluate(geometry, float(h), float(theta), tol)


def csv_row(rec: dict) -> list[str]:
    return [fmt(rec["h_hat"]), fmt(rec["theta_deg"]), fmt(rec["b_hat"]), fmt(rec["energy_reduced"]),
            fmt(rec["force_reduced"]), fmt(rec["e_iso"]), fmt(rec["e_aniso"]), ";".join(rec["flags"])]


def cmd_field(args, out) -> int:
    geometry = geometry_from_args(args)
    heights = heights_from_args(args)
    thetas = args.theta
    if not all(math.isfinite(t) for t in thetas) or not np.all(np.isfinite(heights)):
        raise UsageError("heights and angles must be finite")
    tol = tolerances_from_args(args)
    if args.format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in records(geometry, heights, thetas, tol):
            writer.writerow(csv_row(rec))
            out.flush()
        return EXIT_OK
    results = list(records(geometry, heights, thetas, tol))
    flags = [f for r in results for f in r["flags"]]
    inputs = {**geometry_inputs(geometry), "theta_deg": list(thetas), "h_hat": heights.tolist()}
    emit_json(report(args.command, inputs, results, flags, meta(geometry, tol)), out)
    return EXIT_OK


def cmd_delta_e(args, out) -> int:
    geometry = geometry_from_args(args)
    heights = heights_from_args(args)
    tol = tolerances_from_args(args)
    flags = [] if geometry.has_closed_form else [an.QUADRATURE]
    rows = an.delta_E_sweep(geometry, heights, Tolerances(tol.rel, 0.0))
    if args.format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(DELTA_HEADER)
        for h, d in rows:
            writer.writerow([fmt(h), fmt(geometry.b_hat), fmt(d), ";".join(flags)])
        return EXIT_OK
    results = [{"h_hat": float(h), "delta_energy_reduced": float(d)} for h, d in rows]
    emit_json(report("delta-e", {**geometry_inputs(geometry), "h_hat": heights.tolist()},
                     results, flags, meta(geometry, tol)), out)
    return EXIT_OK


# --- analysis reports -----------------------------------------------------------

PUBLISHED_TORSION_FREE = {
    ("ring", "axial"): "ring_torsion_free",
    ("plate", "axial"): "plate_axial_torsion_free",
    ("ring", "radial"): "ring_radial_torsion_free",
    ("plate", "radial"): "plate_radial_torsion_free",
}


def cmd_torsion_free(args, out) -> int:
    geometry = geometry_from_args(args)
    tol = tolerances_from_args(args)
    tf = an.torsion_free_heights(geometry, tol=Tolerances(tol.rel, 0.0))
    flags = list(tf.flags)
    key = PUBLISHED_TORSION_FREE.get((geometry.kind, geometry.polarization))
    published = None
    if key:
        published = [finite_or_none(x) for x in an.PUBLISHED[key][0]]
        if not an.matches_published(key, tf):
            flags.append(an.PAPER_TEXT_CONFLICT)
    results = {"h1": tf.h1, "h2": finite_or_none(tf.h2), "method": tf.method, "published": published}
    emit_json(report("torsion-free", geometry_inputs(geometry), results, flags, meta(geometry, tol)), out)
    return EXIT_OK


def cmd_repulsion(args, out) -> int:
    geometry = geometry_from_args(args)
    if not geometry.has_closed_form:
        raise UsageError("repulsion windows are available for axial polarization only")
    results, flags = [], []
    for deg in args.theta:
        t = math.radians(deg)
        if geometry.kind == "ring":
            windows, method = an.repulsion_windows(t), "algebraic, cross-checked by sign scan"
        else:
            windows = an.annulus_repulsion_windows(t, geometry.outer_radius, h_max=args.h_max)
            method = "sign scan + brent"
        flags += [f for w in windows for f in w.flags]
        results.append({"theta_deg": deg, "method": method,
                        "windows": [{"lo": w.lo, "hi": w.hi, "flags": list(w.flags)} for w in windows]})
    inputs = {**geometry_inputs(geometry), "theta_deg": list(args.theta)}
    emit_json(report("repulsion", inputs, results, flags, meta(geometry)), out)
    return EXIT_OK


def cmd_critical_angles(args, out) -> int:
    lo, hi, mid = an.critical_angles().degrees()
    flags = [] if an.matches_published("critical_angles_deg", (lo, hi, mid)) else [an.PAPER_TEXT_CONFLICT]
    results = {"short_range_lo_deg": lo, "short_range_hi_deg": hi, "intermediate_deg": mid,
               "published": list(an.PUBLISHED["critical_angles_deg"][0])}
    emit_json(report("critical-angles", {}, results, flags, meta(BodyGeometry.ring())), out)
    return EXIT_OK


def cmd_critical_radius(args, out) -> int:
    table = an.PUBLISHED["table_outer_radius"][0]
    half_width = an.PUBLISHED["table_outer_radius"][1]
    results, flags = [], []
    for deg in args.theta:
        try:
            b = an.critical_outer_radius(math.radians(deg), xtol=args.xtol)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        quoted = table.get(deg) if float(deg).is_integer() else None
        row_flags = []
        if quoted is not None and abs(b - quoted) > half_width:
            row_flags.append(an.PAPER_TEXT_CONFLICT)
        flags += row_flags
        results.append({"theta_deg": deg, "b_hat_star": b, "published": quoted, "flags": row_flags})
    emit_json(report("critical-radius", {"theta_deg": list(args.theta), "xtol": args.xtol},
                     results, flags, meta(BodyGeometry.annulus(2.0))), out)
    return EXIT_OK


def cmd_cycle(args, out) -> int:
    rep = an.machine_cycle()
    results = {
        "points": {k: {"h_hat": rep.heights[k], "theta_deg": math.degrees(rep.angles[k]),
                       "energy_reduced": rep.energies[k]} for k in "ABCD"},
        "work": rep.work,
        "net_work": rep.net_work,
        "E_C": rep.energies["C"],
        "extras": rep.extras,
    }
    emit_json(report("cycle", {}, results, [], meta(BodyGeometry.ring())), out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    ctx = VerifyContext(Tolerances(args.tol, 0.0))
    results = run_checks(ctx, set(args.only) if args.only else None)
    if args.format == "json":
        emit_json(report("verify", {"tol": args.tol, "only": args.only},
                         [{"number": r.number, "name": r.name, "passed": r.passed,
                           "seconds": r.seconds, "error": r.error,
                           "measured": jsonable(r.measured)}
                          for r in results], [], meta(tol=ctx.tol)), out)
    else:
        for r in results:
            out.write(r.line() + "\n")
        failed = [r.number for r in results if not r.passed]
        out.write(f"{len(results) - len(failed)}/{len(results)} checks passed"
                  + (f"; failed: {failed}\n" if failed else "\n"))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


# --- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cpring",
        description="Casimir-Polder energetics of an anisotropic atom on the axis of a ring, "
                    "annular disc or apertured plate.  Angles in degrees; lengths in units "
                    "of the inner radius.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--config", metavar="FILE",
                    help="flat key=value file mirroring the subcommand's flags")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, help_ in (("energy", "energy records on a (height, angle) grid"),
                        ("force", "force records on a (height, angle) grid")):
        p = sub.add_parser(name, help=help_)
        add_body_args(p)
        add_height_args(p)
        p.add_argument("--theta", type=float, nargs="+", default=[0.0], help="atom angles (degrees)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        add_tol_args(p)
        p.set_defaults(func=cmd_field)

    p = sub.add_parser("delta-e", help="E(theta=0) - E(theta=90) along the axis")
    add_body_args(p)
    add_height_args(p)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    add_tol_args(p)
    p.set_defaults(func=cmd_delta_e)

    p = sub.add_parser("torsion-free", help="orientation-independent heights")
    add_body_args(p)
    add_tol_args(p)
    p.set_defaults(func=cmd_torsion_free)

    p = sub.add_parser("repulsion", help="height windows of outward force (axial bodies)")
    add_body_args(p, pols=["axial"])
    p.add_argument("--theta", type=float, nargs="+", default=[0.0, 90.0])
    p.add_argument("--h-max", type=float, default=10.0)
    p.set_defaults(func=cmd_repulsion)

    p = sub.add_parser("critical-angles", help="orientation limits for repulsion from a ring")
    p.set_defaults(func=cmd_critical_angles)

    p = sub.add_parser("critical-radius", help="largest outer radius keeping the intermediate window")
    p.add_argument("--theta", type=float, nargs="+", default=[0.0, 6.0, 9.0, 12.0])
    p.add_argument("--xtol", type=float, default=1e-6)
    p.set_defaults(func=cmd_critical_radius)

    p = sub.add_parser("cycle", help="energies and works of the A-B-C-D machine cycle")
    p.set_defaults(func=cmd_cycle)

    p = sub.add_parser("verify", help="run the reproduction checks")
    p.add_argument("--tol", type=float, default=1e-9, help="relative quadrature tolerance")
    p.add_argument("--only", type=int, nargs="+", help="check numbers to run")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = expand_config(argv)
    except (UsageError, OSError) as exc:
        parser.print_usage(sys.stderr)
        print(f"cpring: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except (UsageError, ValueError) as exc:
        print(f"cpring: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, an.NonConvergenceError) as exc:
        print(f"cpring: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
