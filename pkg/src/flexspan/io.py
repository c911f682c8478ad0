"""Parameter files, mesh frames and trace tables.

A parameter file is a list of ``key = value`` lines; ``#`` starts a comment.
Lengths and seed angles may be written one per key (``l3 = 15``) or as a
comma separated list (``l = 10, 13, 15``).  Angles are in degrees.

    subtype = III-OAE
    N = 4
    L = 3            # OAS vertex index (K for III-OAS)
    l1 = 10
    alpha = 45, 30   # alpha_1, alpha_2, alpha_3, alpha_5, ...
    beta1 = 60
    beta2 = 70
"""

from __future__ import annotations

import csv
import math
import os
import re

import numpy as np

from .construction import Embedding
from .errors import ParamError
from .params import ParameterSet, SubType

_KEY = re.compile(r"^([A-Za-z]+)(\d*)$")
_LENGTHS = ("l", "m", "L")
_ANGLES = ("alpha", "beta")


def _number(text: str, line: int, key: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParamError(f"not a number: {text!r}", line=line, field=key) from None
    if not math.isfinite(v):
        raise ParamError(f"not a finite number: {text!r}", line=line, field=key)
    return v


def _integer(text: str, line: int, key: str) -> int:
    v = _number(text, line, key)
    if v != int(v):
        raise ParamError(f"not an integer: {text!r}", line=line, field=key)
    return int(v)


def parse_params_text(text: str) -> ParameterSet:
    """ParameterSet from the text of a parameter file."""
    scalars: dict[str, tuple[str, int]] = {}
    indexed: dict[str, dict[int, tuple[float, int]]] = {}
    lists: dict[str, tuple[list[str], int]] = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParamError(f"expected 'key = value', got {line!r}", line=no)
        key, value = (s.strip() for s in line.split("=", 1))
        m = _KEY.match(key)
        if not m or not value:
            raise ParamError(f"malformed assignment {line!r}", line=no)
        name, idx = m.group(1), m.group(2)
        if idx:
            if name not in _LENGTHS + _ANGLES:
                raise ParamError("unknown key", line=no, field=key)
            slot = indexed.setdefault(name, {})
            if int(idx) in slot:
                raise ParamError("given twice", line=no, field=key)
            slot[int(idx)] = (_number(value, no, key), no)
        elif "," in value:
            if name not in _LENGTHS + _ANGLES:
                raise ParamError("a list is not allowed here", line=no, field=key)
            lists[name] = ([v.strip() for v in value.split(",")], no)
        else:
            if name in scalars or name in lists:
                raise ParamError("given twice", line=no, field=key)
            scalars[name] = (value, no)

    if "subtype" not in scalars:
        raise ParamError("missing", field="subtype")
    text_st, no = scalars.pop("subtype")
    try:
        st = SubType.parse(text_st)
    except ValueError as exc:
        raise ParamError(str(exc), line=no, field="subtype") from None
    if "N" not in scalars:
        raise ParamError("missing", field="N")
    text_n, no = scalars.pop("N")
    N = _integer(text_n, no, "N")
    if N % 2 or N < 4:
        raise ParamError("N must be an even integer >= 4", line=no, field="N")

    index = None
    if not st.symmetric:
        key = "L" if st is SubType.III_OAE else "K"
        if key in scalars:
            index = _integer(*scalars.pop(key), key)
    # a lone value for a length list is a one-element list
    for name in list(scalars):
        if name in _LENGTHS + _ANGLES:
            lists[name] = ([scalars[name][0]], scalars.pop(name)[1])
    if scalars:
        name, (_, no) = next(iter(scalars.items()))
        raise ParamError("unknown key", line=no, field=name)

    p = ParameterSet(st, N, index=index)
    order = {"alpha": p.required_alpha_indices(), "beta": [1, 2]}
    for name in _LENGTHS + _ANGLES:
        vals: dict[int, float] = {k: v for k, (v, _) in indexed.get(name, {}).items()}
        if name in lists:
            items, no = lists[name]
            if vals:
                raise ParamError("both list and indexed form given", line=no, field=name)
            keys = order.get(name, range(1, len(items) + 1))
            if len(items) > len(keys):
                raise ParamError(f"too many values ({len(items)})", line=no, field=name)
            vals = {k: _number(v, no, name) for k, v in zip(keys, items)}
        if name in _ANGLES:
            setattr(p, name, vals)
        else:
            n = len(vals)
            if sorted(vals) != list(range(1, n + 1)):
                gap = next(k for k in range(1, n + 2) if k not in vals)
                raise ParamError("missing", field=f"{name}{gap}")
            setattr(p, name, tuple(vals[k] for k in range(1, n + 1)))
    return p.validate()


def parse_params(path) -> ParameterSet:
    with open(path, encoding="utf-8") as fh:
        return parse_params_text(fh.read())


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() and abs(v) < 1e15 else repr(float(v))


def serialize_params(p: ParameterSet) -> str:
    """Text form that parses back to an equal ParameterSet."""
    out = [f"subtype = {p.subtype.value}", f"N = {p.N}"]
    if p.index is not None:
        out.append(f"{'L' if p.subtype is SubType.III_OAE else 'K'} = {p.index}")
    for name in _LENGTHS:
        for k, v in enumerate(getattr(p, name), 1):
            out.append(f"{name}{k} = {_fmt(v)}")
    for name in _ANGLES:
        for k, v in sorted(getattr(p, name).items()):
            out.append(f"{name}{k} = {_fmt(v)}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- meshes and traces

def write_obj(path, emb: Embedding, comment: str | None = None):
    """Wavefront OBJ: vertices u, w, v_1..v_N then the 2N oriented faces."""
    with open(path, "w", encoding="utf-8") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        for p in emb.points():
            fh.write("v {:.9g} {:.9g} {:.9g}\n".format(*p))
        for f in emb.faces():
            fh.write("f {} {} {}\n".format(*(i + 1 for i in f)))


def read_obj(path) -> tuple[np.ndarray, list[tuple[int, int, int]]]:
    pts, faces = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                pts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                faces.append(tuple(int(x.split("/")[0]) - 1 for x in parts[1:4]))
    return np.array(pts), faces


def trace_header(N: int) -> list[str]:
    return (["eps1_deg"] + [f"delta{k}" for k in range(1, N + 1)]
            + [f"Delta{k}" for k in range(1, N + 1)] + [f"eps{k}" for k in range(1, N + 1)]
            + ["volume", "mean_curvature"])


def write_trace(path, rows: list, N: int):
    """CSV, one row per frame; angles in degrees, 9 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(trace_header(N))
        for r in rows:
            w.writerow([f"{x:.9g}" for x in r])


def export_mesh_frames(geom, di: int, rng, count: int, out_dir, stem: str = "frame") -> list[str]:
    """``count`` OBJ frames evenly spaced over a flexion range plus a trace CSV."""
    from .flexion import build, continuity_adjust, _state_or_none
    from .validation import oriented_volume, total_mean_curvature

    os.makedirs(out_dir, exist_ok=True)
    span = rng.span()
    if count < 1:
        raise ValueError("count must be positive")
    # positions along the concatenated intervals
    targets = [span * i / (count - 1) for i in range(count)] if count > 1 else [0.0]
    eps_values = []
    for t in targets:
        for lo, hi in rng.intervals:
            if t <= hi - lo + 1e-12:
                eps_values.append(lo + min(t, hi - lo))
                break
            t -= hi - lo
    if geom.subtype.symmetric:
        embs = [build(geom, e, di) for e in eps_values]
    else:
        from .construction import construct
        from .flexion import track
        seed = construct(geom, math.pi / 2, di)
        up = [e for e in eps_values if e >= seed.eps1]
        down = [e for e in eps_values if e < seed.eps1][::-1]
        fwd = track(geom, di, [seed.eps1] + up, seed)[1:]
        bwd = track(geom, di, [seed.eps1] + down, seed)[1:]
        embs = bwd[::-1] + fwd
    files, rows, states = [], [], []
    for i, emb in enumerate(embs):
        name = os.path.join(out_dir, f"{stem}_{i:04d}.obj")
        write_obj(name, emb, f"eps1 = {math.degrees(emb.eps1):.9g} deg, DI = {emb.di}")
        files.append(name)
        states.append(_state_or_none(geom, emb))
    good = [s for s in states if s is not None]
    continuity_adjust(good)
    for emb, s in zip(embs, states):
        if s is None:
            continue
        rows.append([math.degrees(emb.eps1)] + list(np.degrees(s.delta)) + list(np.degrees(s.Delta))
                    + list(np.degrees(s.eps)) + [oriented_volume(emb), total_mean_curvature(s, geom)])
    trace = os.path.join(out_dir, f"{stem}_trace.csv")
    write_trace(trace, rows, geom.N)
    return files + [trace]
