"""Invariants of a flexing suspension: oriented volume, total mean curvature,
solid angles and the dihedral relations of each sub-type."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .construction import Embedding, measure_dihedrals
from .errors import DegenerateStar
from .flexion import (FlexState, FlexionRange, find_flexion_range, sweep)
from .geometry import TWO_PI, cross3
from .params import CapGeometry, SubType

VOLUME_TOL = 1e-6        # times scale^3
CURVATURE_TOL = 1e-6     # relative variation
RELATION_TOL = 1e-8
SOLID_TOL = 1e-8
SUM_TOL = 1e-6           # relative variation
PARALLEL_TOL = 1e-12


# ---------------------------------------------------------------- mesh quantities

def mesh_volume(points: np.ndarray, faces) -> float:
    """Signed volume enclosed by oriented triangles, measured from the centroid."""
    pts = np.asarray(points, dtype=float)
    c = pts.mean(axis=0)
    vol = 0.0
    for a, b, d in faces:
        vol += float(np.dot(pts[a] - c, cross3(pts[b] - c, pts[d] - c)))
    return vol / 6.0


def oriented_volume(emb: Embedding) -> float:
    return mesh_volume(emb.points(), emb.faces())


def mesh_dihedrals(points: np.ndarray, faces) -> dict:
    """Interior dihedral in (0, 2pi) of every edge of a closed oriented mesh.

    Keys are sorted vertex pairs.  Faces are taken as counter-clockwise seen
    from the side the interior angle is measured against.
    """
    pts = np.asarray(points, dtype=float)
    half = {}
    for f in faces:
        for i in range(3):
            p, q, r = f[i], f[(i + 1) % 3], f[(i + 2) % 3]
            half[(p, q)] = cross3(pts[q] - pts[p], pts[r] - pts[p])
    out = {}
    for (p, q), n1 in half.items():
        if p > q:
            continue
        n2 = half.get((q, p))
        if n2 is None:
            raise ValueError(f"edge {p}-{q} has no opposite half edge")
        e = pts[q] - pts[p]
        e = e / np.linalg.norm(e)
        phi = math.atan2(float(np.dot(cross3(n1, n2), e)), float(np.dot(n1, n2)))
        out[(p, q)] = math.pi - phi
    return out


def embedding_dihedrals(emb: Embedding) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(delta, eps, Delta) as interior angles of the oriented surface."""
    N = len(emb.v)
    table = mesh_dihedrals(emb.points(), emb.faces())

    def get(a, b):
        return table[(a, b) if a < b else (b, a)]

    delta = np.array([get(0, 2 + i) for i in range(N)])
    Delta = np.array([get(1, 2 + i) for i in range(N)])
    eps = np.array([get(2 + i, 2 + (i + 1) % N) for i in range(N)])
    return delta, eps, Delta


def solid_angle(dihedrals, edges=None) -> float:
    """Spherical excess of a vertex figure from its interior dihedrals.

    ``edges`` are the incident edge vectors in cyclic order; when given they
    are checked for parallel neighbours.  Values above 2pi are returned as is.
    """
    d = np.asarray(dihedrals, dtype=float)
    n = len(d)
    if edges is not None:
        E = np.asarray(edges, dtype=float)
        E = E / np.linalg.norm(E, axis=1)[:, None]
        for i in range(n):
            if np.linalg.norm(cross3(E[i], E[(i + 1) % n])) < PARALLEL_TOL:
                raise DegenerateStar(f"edges {i} and {(i + 1) % n} of the star are parallel")
    return float(d.sum() - (n - 2) * math.pi)


def vertex_solid_angles(emb: Embedding, check: bool = False):
    """(sigma_v per base vertex, sigma_u, sigma_w)."""
    delta, eps, Delta = embedding_dihedrals(emb)
    u, w, v = emb.u, emb.w, emb.v
    N = len(v)
    sig = np.zeros(N)
    for i in range(N):
        edges = None
        if check:
            edges = [v[(i + 1) % N] - v[i], u - v[i], v[i - 1] - v[i], w - v[i]]
        sig[i] = solid_angle([eps[i], delta[i], eps[i - 1], Delta[i]], edges)
    su = solid_angle(delta, [p - u for p in v] if check else None)
    sw = solid_angle(Delta, [p - w for p in v] if check else None)
    return sig, su, sw


def solid_angle_pairs(subtype: SubType, N: int) -> list[tuple[int, int]]:
    """1-based base vertex pairs whose solid angles add to 4pi."""
    M = N // 2
    if subtype in (SubType.I_OEE, SubType.II_OEE):
        return [(k, k + M) for k in range(1, M + 1)]
    if subtype is SubType.II_AEE:
        return [(1, M + 1)] + [(k, N - k + 2) for k in range(2, M + 1)]
    pairs = [(1, 3)] + [(2 * k, 2 * k + 3) for k in range(1, M - 1)] + [(N - 2, N)]
    return sorted(set(pairs))


def constant_solid_vertices(subtype: SubType, N: int) -> list:
    """Vertices whose solid angle stays at 2pi: 'u', 'w' or 1-based indices."""
    if subtype is SubType.II_AEE:
        return [1, N // 2 + 1]
    if subtype is SubType.II_OEE:
        return ["u", "w"]
    return []


def total_mean_curvature(state: FlexState, geom: CapGeometry) -> float:
    """2C(S) from the (continuity adjusted) dihedrals of a state."""
    return float(np.sum(geom.l * (math.pi - state.delta))
                 + np.sum(geom.m * (math.pi - state.Delta))
                 + np.sum(geom.L * (math.pi - state.eps)))


# ---------------------------------------------------------------- dihedral relations

# alternatives of the third-type relation, compared modulo 2pi; 3pi - x falls on pi - x
ALTERNATIVES = ("x", "pi-x", "2pi-x")


def _mod_err(a, b):
    return abs(math.remainder(a - b, TWO_PI))


def _alt_values(x):
    return (x, math.pi - x, TWO_PI - x)


def relation_pairs(subtype: SubType, N: int) -> list[tuple[str, int, str, int, str]]:
    """(name, k, name, j, kind) rows; kind 'conj' is x = 2pi - y, 'alt' is membership."""
    M = N // 2
    rows = []
    if subtype is SubType.I_OEE:
        for k in range(1, M + 1):
            rows += [("delta", k, "Delta", k + M, "conj"), ("delta", k + M, "Delta", k, "conj"),
                     ("eps", k, "eps", k + M, "conj")]
    elif subtype is SubType.II_AEE:
        rows.append(("delta", 1, "Delta", 1, "conj"))
        rows += [("delta", k, "Delta", N - k + 2, "conj") for k in range(2, N + 1)]
        rows += [("eps", k, "eps", N - k + 1, "conj") for k in range(1, M + 1)]
    elif subtype is SubType.II_OEE:
        for k in range(1, M + 1):
            rows += [("delta", k, "delta", k + M, "conj"), ("Delta", k, "Delta", k + M, "conj"),
                     ("eps", k, "eps", k + M, "conj")]
    else:
        for k, j in solid_angle_pairs(subtype, N):
            rows += [("delta", k, "Delta", j, "alt"), ("Delta", k, "delta", j, "alt"),
                     ("eps", k, "eps", j, "alt2")]
    return rows


@dataclass
class RelationReport:
    residual: float
    # per row of relation_pairs: indices into ALTERNATIVES that hold (empty for exact rows)
    matches: list = field(default_factory=list)


def dihedral_relations(state: FlexState, subtype: SubType, tol: float = RELATION_TOL) -> RelationReport:
    """Residual of the sub-type dihedral relations on raw (mod 2pi) dihedrals."""
    raw = state.raw if state.raw is not None else (state.delta, state.eps, state.Delta)
    vals = {"delta": raw[0], "eps": raw[1], "Delta": raw[2]}
    N = len(raw[0])
    worst = 0.0
    matches = []
    for a, k, b, j, kind in relation_pairs(subtype, N):
        x, y = vals[a][k - 1], vals[b][j - 1]
        if kind == "conj":
            r = _mod_err(x, TWO_PI - y)
            matches.append(())
        else:
            alts = _alt_values(y) if kind == "alt" else (y, None, TWO_PI - y)
            errs = [_mod_err(x, t) if t is not None else math.inf for t in alts]
            r = min(errs)
            matches.append(tuple(i for i, e in enumerate(errs) if e < tol))
        worst = max(worst, r)
    return RelationReport(worst, matches)


# ---------------------------------------------------------------- full battery

@dataclass
class ValidationReport:
    eps1: float
    volume: float
    mean_curvature: float
    eq10: float
    sigma: np.ndarray
    sigma_u: float
    sigma_w: float
    pair_residual: float
    constant_residual: float
    relation_residual: float
    dihedral_sum: float
    solid_sum: float
    relation_matches: list = field(default_factory=list)


def validate_state(geom: CapGeometry, state: FlexState) -> ValidationReport:
    emb = state.embedding
    sig, su, sw = vertex_solid_angles(emb)
    pair = abs(su + sw - 2 * TWO_PI)
    for k, j in solid_angle_pairs(geom.subtype, geom.N):
        pair = max(pair, abs(sig[k - 1] + sig[j - 1] - 2 * TWO_PI))
    const = 0.0
    for key in constant_solid_vertices(geom.subtype, geom.N):
        s = su if key == "u" else sw if key == "w" else sig[key - 1]
        const = max(const, abs(s - TWO_PI))
    rel = dihedral_relations(state, geom.subtype)
    return ValidationReport(
        eps1=state.eps1,
        volume=oriented_volume(emb),
        mean_curvature=total_mean_curvature(state, geom),
        eq10=state.eq10,
        sigma=sig, sigma_u=su, sigma_w=sw,
        pair_residual=pair, constant_residual=const,
        relation_residual=rel.residual,
        dihedral_sum=float(state.dihedrals().sum()),
        solid_sum=float(sig.sum() + su + sw),
        relation_matches=rel.matches,
    )


def _variation(values) -> float:
    x = np.asarray(values, dtype=float)
    if len(x) < 2:
        return 0.0
    return float((x.max() - x.min()) / max(np.abs(x).max(), 1e-300))


@dataclass
class ValidationSummary:
    di: int
    reports: list
    checks: dict  # name -> (value, tolerance)

    @property
    def passed(self) -> bool:
        return all(v <= tol for v, tol in self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, (v, tol) in self.checks.items() if not v <= tol]


def validate_full(geom: CapGeometry, di: int, rng: FlexionRange | None = None,
                  step: float = 1.0, states: list | None = None) -> ValidationSummary:
    """Run every check over a flexion range sampled on a uniform grid."""
    if states is None:
        if rng is None:
            rng = find_flexion_range(geom, di)
        states = sweep(geom, di, rng, step)
    reports = [validate_state(geom, s) for s in states]
    scale = float(max(geom.l.max(), geom.m.max(), geom.L.max()))
    LN = float(geom.L[-1])
    # a third-type alternative must hold at every sample
    locked = 0.0
    if reports and reports[0].relation_matches:
        for i in range(len(reports[0].relation_matches)):
            rows = [set(r.relation_matches[i]) for r in reports]
            if rows[0] is not None and len(rows[0]) and not set.intersection(*rows):
                locked = math.inf
    checks = {
        "volume": (max((abs(r.volume) for r in reports), default=0.0) / scale ** 3, VOLUME_TOL),
        "mean_curvature": (_variation([r.mean_curvature for r in reports]), CURVATURE_TOL),
        "eq10": (max((abs(r.eq10) for r in reports), default=0.0) / LN ** 2, 1e-6),
        "dihedral_relations": (max((r.relation_residual for r in reports), default=0.0), RELATION_TOL),
        "relation_lock": (locked, 0.0),
        "solid_pairs": (max((r.pair_residual for r in reports), default=0.0), SOLID_TOL),
        "solid_constant": (max((r.constant_residual for r in reports), default=0.0), SOLID_TOL),
        "dihedral_sum": (_variation([r.dihedral_sum for r in reports]), SUM_TOL),
        "solid_sum": (_variation([r.solid_sum for r in reports]), SUM_TOL),
    }
    return ValidationSummary(di, reports, checks)
