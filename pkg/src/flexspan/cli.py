"""Command line driver.

Every run prints one JSON document on stdout.  Angles are reported in degrees
rounded to 5 decimals; failures exit nonzero with a diagnostic document.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__, fixtures
from .construction import CLOSURE_TOL, construct, format_di, measure_dihedrals
from .errors import FlexspanError, NoRealRoot, ParamError
from .flexion import build, enumerate_foldings, find_flexion_range, sweep
from .io import export_mesh_frames, parse_params, write_obj
from .params import CapGeometry, complete
from .validation import validate_full

DEG_DIGITS = 5


def _deg(x) -> float:
    return round(math.degrees(float(x)), DEG_DIGITS) + 0.0


def _degs(xs) -> list:
    return [_deg(x) for x in xs]


def _num(x, digits: int = 12) -> float:
    return float(f"{float(x):.{digits}g}")


def parse_di(text: str) -> int:
    """Decimal or hexadecimal DI; hex needs a 0x prefix or a trailing 'h'."""
    t = text.strip().lower()
    if t.startswith("0x"):
        return int(t, 16)
    if t.endswith("h"):
        return int(t[:-1], 16)
    if any(c in "abcdef" for c in t):
        return int(t, 16)
    return int(t)


def _load(args):
    if bool(args.params) == bool(args.fixture):
        raise ParamError("give exactly one of --params or --fixture")
    if args.fixture:
        fx = fixtures.get(args.fixture)
        return fx.params(), fx
    return parse_params(args.params), None


def _geometries(args) -> list[CapGeometry]:
    params, _ = _load(args)
    return complete(params)


def _pick(geoms: list[CapGeometry], args) -> tuple[CapGeometry, int]:
    """Geometry and DI selected by --di / --completion."""
    di = parse_di(args.di) if getattr(args, "di", None) else None
    if getattr(args, "completion", None) is not None:
        g = geoms[args.completion]
    elif di is not None:
        g = next((x for x in geoms if x.di == di), geoms[0])
    else:
        g = geoms[0]
    if di is None:
        di = g.di
    if di is None:
        # symmetric sub-types: the first folding found
        found = enumerate_foldings(g)
        if not found:
            raise FlexspanError("no flexible folding found")
        di = found[0][0]
    return g, di


def _geom_doc(g: CapGeometry) -> dict:
    doc = {
        "subtype": g.subtype.value,
        "N": g.N,
        "lengths": {k: [_num(x) for x in getattr(g, k)] for k in ("l", "m", "L")},
        "angles_deg": {k: _degs(getattr(g, k)) for k in ("alpha", "A", "beta", "gamma", "B", "Gamma")},
    }
    if g.index is not None:
        doc["index"] = g.index
    if g.di is not None:
        doc["di"] = g.di
        doc["di_hex"] = format_di(g.di)
    return doc


def _range_doc(rng) -> dict:
    return {"form": rng.form, "intervals_deg": [[_deg(lo), _deg(hi)] for lo, hi in rng.intervals]}


# ---------------------------------------------------------------- commands

def cmd_complete(args) -> tuple[int, dict]:
    geoms = _geometries(args)
    return 0, {"command": "complete", "completions": [_geom_doc(g) for g in geoms]}


def cmd_construct(args) -> tuple[int, dict]:
    g, di = _pick(_geometries(args), args)
    eps1 = math.radians(args.eps1)
    emb = build(g, eps1, di) if g.subtype.symmetric else construct(g, eps1, di)
    closed = bool(emb.closure < CLOSURE_TOL)
    delta, eps, Delta = measure_dihedrals(emb)
    doc = {
        "command": "construct",
        "eps1_deg": _deg(eps1),
        "di": emb.di,
        "di_hex": format_di(emb.di),
        "closed": closed,
        "closure": _num(emb.closure, 6),
        "points": {"u": [_num(x) for x in emb.u], "w": [_num(x) for x in emb.w],
                   "v": [[_num(x) for x in p] for p in emb.v]},
        "dihedrals_deg": {"delta": _degs(delta), "eps": _degs(eps), "Delta": _degs(Delta)},
    }
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "suspension.obj")
        write_obj(path, emb, f"eps1 = {args.eps1} deg, DI = {emb.di}")
        doc["files"] = [path]
    return (0 if closed else 1), doc


def cmd_sweep(args) -> tuple[int, dict]:
    g, di = _pick(_geometries(args), args)
    rng = find_flexion_range(g, di, args.step)
    states = sweep(g, di, rng, args.step)
    doc = {"command": "sweep", "di": di, "di_hex": format_di(di), "range": _range_doc(rng),
           "samples": [{"eps1_deg": _deg(s.eps1), "delta": _degs(s.delta), "Delta": _degs(s.Delta),
                        "eps": _degs(s.eps)} for s in states]}
    if args.out:
        doc["files"] = export_mesh_frames(g, di, rng, args.frames, args.out)
    return 0, doc


def cmd_validate(args) -> tuple[int, dict]:
    g, di = _pick(_geometries(args), args)
    rng = find_flexion_range(g, di, args.step)
    summary = validate_full(g, di, rng, args.step)
    doc = {"command": "validate", "di": di, "di_hex": format_di(di), "range": _range_doc(rng),
           "samples": len(summary.reports), "passed": summary.passed,
           "checks": {k: {"value": _num(v, 6), "tolerance": tol, "passed": bool(v <= tol)}
                      for k, (v, tol) in summary.checks.items()}}
    return (0 if summary.passed else 1), doc


def cmd_enumerate(args) -> tuple[int, dict]:
    out = []
    for i, g in enumerate(_geometries(args)):
        for di, rng in enumerate_foldings(g, exhaustive=args.exhaustive, step=args.step):
            out.append({"completion": i, "di": di, "di_hex": format_di(di), "range": _range_doc(rng)})
    return 0, {"command": "enumerate", "count": len(out), "foldings": out}


COMMANDS = {"complete": cmd_complete, "construct": cmd_construct, "sweep": cmd_sweep,
            "validate": cmd_validate, "enumerate": cmd_enumerate}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flexspan", description="Flexible suspensions: parameters, "
                                 "construction, flexion ranges and invariant checks.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        src = p.add_argument_group("input")
        src.add_argument("--params", metavar="FILE", help="parameter file")
        src.add_argument("--fixture", metavar="NAME", help="built-in table row, e.g. D-IV#2")
        if name in ("construct", "sweep", "validate"):
            p.add_argument("--di", help="dihedral identifier, decimal or hex (0x...)")
            p.add_argument("--completion", type=int, help="index of the completion to use")
        if name == "construct":
            p.add_argument("--eps1", type=float, required=True, metavar="DEG")
        if name in ("sweep", "validate", "enumerate"):
            p.add_argument("--step", type=float, default=1.0, metavar="DEG")
        if name in ("construct", "sweep"):
            p.add_argument("--out", metavar="DIR", help="write mesh files here")
        if name == "sweep":
            p.add_argument("--frames", type=int, default=36)
        if name == "enumerate":
            p.add_argument("--exhaustive", action="store_true")
    return ap


def _error_doc(exc: Exception) -> dict:
    doc = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, NoRealRoot) and exc.vertex is not None:
        doc["vertex"] = exc.vertex
    if isinstance(exc, ParamError):
        doc["line"], doc["field"] = exc.line, exc.field
    return doc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        status, doc = COMMANDS[args.command](args)
    except (FlexspanError, KeyError, ValueError, OSError) as exc:
        status, doc = 2, _error_doc(exc)
        print(doc["message"], file=sys.stderr)
    json.dump(doc, sys.stdout, indent=2, sort_keys=True, default=_json_default)
    sys.stdout.write("\n")
    return status


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


if __name__ == "__main__":
    sys.exit(main())
