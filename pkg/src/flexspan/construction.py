"""Coordinates of a suspension at one value of the flexion variable eps_1.

The face u v_2 v_1 is fixed, w is swung about v_1 v_2 by eps_1, and each
further base vertex is found by turning the previous u-face about u v_k by the
dihedral picked out of the vertex quadratic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FlexspanError, ModelMismatch
from .geometry import (TWO_PI, angle_diff, branch_of, cross3, opposite_dihedral, propagate_epsilon,
                       quadratic_roots, vertex_quadratic, wrap)
from .params import CapGeometry, SubType, partial_construction_search

CLOSURE_TOL = 1e-8
MODEL_TOL = 1e-6


def di_bit(di: int, k: int) -> int:
    """Root choice at v_k (1-indexed) encoded in a dihedral identifier."""
    return (di >> (k - 1)) & 1


def format_di(di: int) -> str:
    return f"{di}={di:X}_16"


@dataclass
class Embedding:
    u: np.ndarray
    w: np.ndarray
    v: np.ndarray  # shape (N, 3); v[k-1] is v_k
    eps1: float
    di: int = 0
    closure: float = math.nan
    # dihedrals produced by the vertex solves, indexed like v
    delta: np.ndarray | None = None
    eps: np.ndarray | None = None
    Delta: np.ndarray | None = None
    model_residual: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.v)

    def points(self) -> np.ndarray:
        """All vertexes in the order u, w, v_1 .. v_N."""
        return np.vstack([self.u, self.w, self.v])

    def faces(self) -> list[tuple[int, int, int]]:
        """Oriented triangles as indices into points()."""
        N = self.N
        out = []
        for k in range(N):
            k1 = (k + 1) % N
            out.append((0, 2 + k1, 2 + k))
        for k in range(N):
            k1 = (k + 1) % N
            out.append((1, 2 + k, 2 + k1))
        return out

    def transformed(self, R: np.ndarray, t: np.ndarray) -> "Embedding":
        f = lambda p: R @ p + t
        out = Embedding(f(self.u), f(self.w), (R @ self.v.T).T + t, self.eps1, self.di,
                        self.closure, self.delta, self.eps, self.Delta, self.model_residual,
                        dict(self.meta))
        return out


def _unit(x):
    return x / np.linalg.norm(x)


def interior_dihedral(p, q, a, b, n_a) -> float:
    """Dihedral on edge pq between the face through a and the face through b.

    Measured by turning the half-plane of a toward ``n_a`` (the inward normal
    of its face) until it reaches the half-plane of b; result in [0, 2pi).
    """
    e = _unit(q - p)
    pa = a - p
    pa = pa - e * (pa @ e)
    pb = b - p
    pb = pb - e * (pb @ e)
    axis = e if cross3(e, pa) @ n_a > 0 else -e
    return wrap(math.atan2(cross3(pa, pb) @ axis, pa @ pb))


def rotation_axis(p, q, a, n_a) -> np.ndarray:
    """Unit axis along pq for which positive rotation opens the dihedral at pq."""
    e = _unit(q - p)
    pa = a - p
    return e if cross3(e, pa) @ n_a > 0 else -e


def place_about(p, q, a, n_a, phi, r, theta) -> np.ndarray:
    """Point at distance r from p, angle phi from pq, dihedral theta from the face (p, q, a)."""
    e = _unit(q - p)
    h = a - p
    h = _unit(h - e * (h @ e))
    c = cross3(e, h)
    if c @ n_a < 0:
        c = -c
    return p + r * (math.cos(phi) * e + math.sin(phi) * (math.cos(theta) * h + math.sin(theta) * c))


def normal_f(u, vk, vk1):
    """Inward normal of the u-face through v_k, v_{k+1}."""
    return cross3(vk1 - u, vk - u)


def normal_F(w, vk, vk1):
    """Inward normal of the w-face through v_k, v_{k+1}."""
    return cross3(vk - w, vk1 - w)


def place_initial_faces(geom: CapGeometry, eps1: float) -> Embedding:
    N = geom.N
    l1, m1, L1 = geom.l[0], geom.m[0], geom.L[0]
    be1, B1 = geom.beta[0], geom.B[0]
    u = np.array([l1 * math.sin(be1), 0.0, -l1 * math.cos(be1)])
    w = np.array([m1 * math.sin(B1) * math.cos(eps1), m1 * math.sin(B1) * math.sin(eps1),
                  -m1 * math.cos(B1)])
    v = np.full((N, 3), np.nan)
    v[0] = 0.0
    v[1] = (0.0, 0.0, -L1)
    nan = np.full(N, np.nan)
    emb = Embedding(u, w, v, eps1, delta=nan.copy(), eps=nan.copy(), Delta=nan.copy())
    emb.eps[0] = wrap(eps1)
    return emb


def _step(geom, emb, k, choose):
    """Solve v_k and place v_{k+1}.  ``choose`` maps the two roots to one delta."""
    ang = geom.vertex_angles(k)
    eps_prev = emb.eps[k - 2]
    plus, minus = quadratic_roots(vertex_quadratic(ang, eps_prev), k)
    delta = choose(k, wrap(2.0 * math.atan(plus)), wrap(2.0 * math.atan(minus)))
    eps_k = propagate_epsilon(ang, delta, eps_prev)
    Delta = opposite_dihedral(ang, delta, eps_k)
    u, v = emb.u, emb.v
    n1 = normal_f(u, v[k - 2], v[k - 1])
    v[k] = place_about(v[k - 1], u, v[k - 2], n1, geom.beta[k - 1], geom.L[k - 1], delta)
    emb.delta[k - 1], emb.eps[k - 1], emb.Delta[k - 1] = delta, eps_k, Delta


def _by_bits(di):
    return lambda k, p, m: p if di_bit(di, k) else m


def construct_prefix(geom: CapGeometry, eps1: float, di: int, last: int, choose=None) -> Embedding:
    """Place v_1 .. v_{last+1} by solving the vertexes v_2 .. v_last."""
    emb = place_initial_faces(geom, eps1)
    emb.di = di
    choose = choose or _by_bits(di)
    for k in range(2, last + 1):
        _step(geom, emb, k, choose)
    return emb


def _finish(geom: CapGeometry, emb: Embedding) -> Embedding:
    N = geom.N
    L_N = geom.L[N - 1]
    emb.closure = abs(np.linalg.norm(emb.v[N - 1] - emb.v[0]) - L_N) / L_N
    return emb


def construct(geom: CapGeometry, eps1: float, di: int, choose=None) -> Embedding:
    """Full embedding by the recursion over v_2 .. v_{N-1}.

    Bits at v_1 and v_N do not influence the result; they are recorded in
    ``full_di`` once the surface is closed.  ``closure`` is the relative
    mismatch of the closing base edge.
    """
    emb = construct_prefix(geom, eps1, di, geom.N - 1, choose)
    return _finish(geom, emb)


def measure_dihedrals(emb: Embedding) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(delta, eps, Delta) measured from coordinates, each indexed by k-1."""
    u, w, v = emb.u, emb.w, emb.v
    N = len(v)
    delta, eps, Delta = np.zeros(N), np.zeros(N), np.zeros(N)
    for i in range(N):
        nx, pv = v[(i + 1) % N], v[i - 1]
        eps[i] = interior_dihedral(v[i], nx, u, w, normal_f(u, v[i], nx))
        delta[i] = interior_dihedral(v[i], u, pv, nx, normal_f(u, pv, v[i]))
        Delta[i] = interior_dihedral(v[i], w, pv, nx, normal_F(w, pv, v[i]))
    return delta, eps, Delta


def full_di(geom: CapGeometry, emb: Embedding) -> int:
    """Dihedral identifier of a closed embedding, every vertex included."""
    delta, eps, _ = measure_dihedrals(emb)
    N = geom.N
    di = 0
    for k in range(1, N + 1):
        bit = branch_of(geom.vertex_angles(k), eps[(k - 2) % N], delta[k - 1])
        di |= bit << (k - 1)
    return di


def edge_errors(geom: CapGeometry, emb: Embedding) -> float:
    """Largest relative edge-length mismatch over all 3N edges."""
    N = geom.N
    worst = 0.0
    for i in range(N):
        j = (i + 1) % N
        for got, want in ((np.linalg.norm(emb.u - emb.v[i]), geom.l[i]),
                          (np.linalg.norm(emb.w - emb.v[i]), geom.m[i]),
                          (np.linalg.norm(emb.v[j] - emb.v[i]), geom.L[i])):
            worst = max(worst, abs(got - want) / want)
    return worst


# ---------------------------------------------------------------- sub-types I/II

def _half_turn(u, w, a, b):
    """Half-turn swapping u<->w and a<->b (exists when |ua|=|wb| and |ub|=|wa|)."""
    p = 0.25 * (u + w + a + b)
    d1, d2 = w - u, b - a
    axis = cross3(d1, d2)
    n = np.linalg.norm(axis)
    if n < 1e-12:
        # both segments parallel: any axis through p perpendicular to them
        axis = cross3(d1, [1.0, 0.0, 0.0])
        if np.linalg.norm(axis) < 1e-9:
            axis = cross3(d1, [0.0, 1.0, 0.0])
        n = np.linalg.norm(axis)
    axis = axis / n
    R = 2.0 * np.outer(axis, axis) - np.eye(3)
    return lambda x: p + R @ (x - p)


def _mirror(a, b):
    """Reflection in the perpendicular bisector plane of ab."""
    d = b - a
    if np.linalg.norm(d) < 1e-12 * max(1.0, np.linalg.norm(a)):
        raise FlexspanError("coincident vertexes leave the symmetry plane undefined")
    n = _unit(d)
    mid = 0.5 * (a + b)
    return lambda x: x - 2.0 * ((x - mid) @ n) * n


def symmetric_completion(geom: CapGeometry, eps1: float, di: int) -> Embedding:
    """Embedding of a sub-type I/II folding from the root choices at v_2 .. v_M.

    The vertexes past v_{M+1} are images of earlier ones under the symmetry
    of the sub-type, so the construction closes by itself.  The returned
    ``di`` covers every vertex.
    """
    st = geom.subtype
    if not st.symmetric:
        raise ValueError("symmetric completion applies to sub-types I and II only")
    N, M = geom.N, geom.M
    emb = construct_prefix(geom, eps1, di, M)
    u, w, v = emb.u, emb.w, emb.v
    if st is SubType.I_OEE:
        S = _half_turn(u, w, v[0], v[M])
        for k in range(1, M):
            v[k + M] = S(v[k])
    elif st is SubType.II_AEE:
        S = _mirror(u, w)
        for k in range(2, M + 1):
            v[N - k + 1] = S(v[k - 1])
    else:
        S = _mirror(v[0], v[M])
        for k in range(1, M):
            v[k + M] = S(v[k])
    _finish(geom, emb)
    emb.delta, emb.eps, emb.Delta = measure_dihedrals(emb)
    emb.di = full_di(geom, emb)
    emb.meta["prefix"] = prefix_bits(di, M)
    return emb


def prefix_bits(di: int, M: int) -> int:
    """The free root choices of a symmetric folding (bits at v_2 .. v_M)."""
    mask = ((1 << (M - 1)) - 1) << 1
    return di & mask


def all_prefixes(M: int) -> list[int]:
    return [p << 1 for p in range(1 << (M - 1))]


def _frame(origin, z_dir, x_hint):
    z = _unit(z_dir)
    x = x_hint - z * (x_hint @ z)
    if np.linalg.norm(x) < 1e-12:
        x = cross3(z, [0.0, 1.0, 0.0])
        if np.linalg.norm(x) < 1e-12:
            x = cross3(z, [1.0, 0.0, 0.0])
    x = _unit(x)
    y = cross3(z, x)
    R = np.vstack([x, y, z])
    return R, -R @ origin


def normalize_to_model(emb: Embedding, subtype: SubType, tol: float = MODEL_TOL) -> Embedding:
    """Move a sub-type I/II embedding into its coordinate model.

    I-OEE: u, w on the z axis and v_{k+M} = (-x_k, y_k, -z_k).
    II-AEE: u, w on the z axis, v_1 and v_{M+1} in z = 0, v_{N-k+2} = (x_k, y_k, -z_k).
    II-OEE: u, w in z = 0, v_1 on the z axis, v_{k+M} = (x_k, y_k, -z_k).
    """
    u, w, v = emb.u, emb.w, emb.v
    N = len(v)
    M = N // 2
    if subtype is SubType.I_OEE:
        o = 0.5 * (u + w)
        a = 0.5 * (v[0] + v[M]) - o
        z = u - w
        a = a - _unit(z) * (a @ _unit(z))
        # y axis along the half-turn axis
        zz = _unit(z)
        yy = _unit(a) if np.linalg.norm(a) > 1e-12 else _unit(cross3(zz, v[0] - v[M]))
        xx = cross3(yy, zz)
        R = np.vstack([xx, yy, zz])
        t = -R @ o
    elif subtype is SubType.II_AEE:
        o = 0.5 * (u + w)
        R, t = _frame(o, u - w, v[0] - o)
    elif subtype is SubType.II_OEE:
        o = 0.5 * (v[0] + v[M])
        R, t = _frame(o, v[0] - v[M], u - o)
    else:
        raise ValueError("no coordinate model for the third sub-type")
    out = emb.transformed(R, t)
    U, W, V = out.u, out.w, out.v
    dev = []
    if subtype is SubType.I_OEE:
        dev += [U[0], U[1], W[0], W[1], U[2] + W[2]]
        flip = np.array([-1.0, 1.0, -1.0])
        for k in range(M):
            dev += list(V[k + M] - flip * V[k])
    elif subtype is SubType.II_AEE:
        dev += [U[0], U[1], W[0], W[1], U[2] + W[2], V[0][2], V[M][2]]
        flip = np.array([1.0, 1.0, -1.0])
        for k in range(2, M + 1):
            dev += list(V[N - k + 1] - flip * V[k - 1])
    else:
        dev += [U[2], W[2], V[0][0], V[0][1]]
        flip = np.array([1.0, 1.0, -1.0])
        for k in range(M):
            dev += list(V[k + M] - flip * V[k])
    resid = float(np.sqrt(np.mean(np.square(dev))))
    out.model_residual = resid
    if resid > tol:
        raise ModelMismatch(resid)
    return out


# ---------------------------------------------------------------- sub-type III

def cap_closure(geom: CapGeometry, deltas: dict) -> float:
    """Angle mismatch at u between the closing edges, from the apical chain alone."""
    from .geometry import rot_x, rot_z
    N = geom.N
    al = geom.alpha
    x = np.array([1.0, 0.0, 0.0])
    Mx = rot_z(al[0])
    for i in range(2, N):
        Mx = Mx @ rot_x(math.pi - deltas[i]) @ rot_z(al[i - 1])
    vN = Mx @ x
    return math.acos(max(-1.0, min(1.0, vN[0]))) - al[N - 1]


def closing_dis(geom: CapGeometry, eps1: float, tol: float = 1e-7) -> list[int]:
    """Root choices at v_2 .. v_{N-1} that close the suspension at eps1.

    Branches are pruned with the vertex-pair relations, so only candidates
    compatible with flexibility are returned.
    """
    N = geom.N
    angles = {k: geom.vertex_angles(k) for k in range(2, N)}
    out = []
    for bits, eps, dl, Dl in partial_construction_search(angles, N, N - 1, eps1):
        if abs(cap_closure(geom, dl)) < tol:
            out.append(bits)
    return out


def find_flexible_di(geom: CapGeometry, eps1: float = math.pi / 2) -> int | None:
    """Full identifier of the flexible folding of a third sub-type geometry."""
    from .flexion import flexibility_test
    for bits in closing_dis(geom, eps1):
        try:
            emb = construct(geom, eps1, bits)
        except FlexspanError:
            continue
        if emb.closure > CLOSURE_TOL:
            continue
        L_N = geom.L[-1]
        if abs(flexibility_test(geom, eps1, bits)) < 1e-6 * L_N * L_N:
            return full_di(geom, emb)
    return None


def all_closing_dis(geom: CapGeometry, eps1: float, tol: float = CLOSURE_TOL) -> list[int]:
    """Exhaustive search over the 2^(N-2) root choices at v_2 .. v_{N-1}."""
    N = geom.N
    out = []
    for p in range(1 << (N - 2)):
        bits = p << 1
        try:
            emb = construct(geom, eps1, bits)
        except FlexspanError:
            continue
        if emb.closure < tol:
            out.append(full_di(geom, emb))
    return sorted(set(out))
