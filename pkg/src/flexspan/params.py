"""Parameter sets and their completion into full cap geometry.

Sub-types I and II are fixed by edge lengths alone.  The third sub-type is
seeded by a handful of angles and completed face by face; each stage solves a
quadratic in a half-angle cotangent and keeps only the roots that still admit a
partial construction at eps_1 = pi/2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoCompletion, ParamError, RealizabilityFailure, TriangleViolation
from .geometry import VertexAngles, ch, th

ANGLE_EPS = 1e-12
MERGE_TOL_DEG = 1e-7


class SubType(enum.Enum):
    I_OEE = "I-OEE"
    II_AEE = "II-AEE"
    II_OEE = "II-OEE"
    III_OAE = "III-OAE"
    III_OAS = "III-OAS"

    @classmethod
    def parse(cls, text: str) -> "SubType":
        key = text.strip().upper().replace("_", "-")
        for s in cls:
            if s.value == key:
                return s
        raise ValueError(f"unknown sub-type {text!r}")

    @property
    def symmetric(self) -> bool:
        """True for the edge-length families completed by symmetry."""
        return self in (SubType.I_OEE, SubType.II_AEE, SubType.II_OEE)


@dataclass
class ParameterSet:
    """Independent parameters of one suspension.

    Lengths are plain numbers and angles are kept in degrees, exactly as they
    are read from or written to a parameter file.  For the third sub-type
    ``l`` holds the single length l_1 and ``alpha``/``beta`` map a vertex index
    to its seed angle.
    """
    subtype: SubType
    N: int
    l: tuple = ()
    m: tuple = ()
    L: tuple = ()
    index: int | None = None  # L for III-OAE, K for III-OAS
    alpha: dict = field(default_factory=dict)
    beta: dict = field(default_factory=dict)

    @property
    def M(self) -> int:
        return self.N // 2

    def required_alpha_indices(self) -> list[int]:
        return [1, 2] + list(range(3, self.N - 2, 2))

    def validate(self):
        N = self.N
        if not isinstance(N, int) or N < 4 or N % 2:
            raise ParamError("N must be an even integer >= 4", field="N")
        M = N // 2
        st = self.subtype
        if st in (SubType.I_OEE, SubType.II_AEE):
            want = {"l": N, "L": M}
        elif st is SubType.II_OEE:
            want = {"l": M, "m": M, "L": M}
        else:
            want = {"l": 1}
        for name in ("l", "m", "L"):
            got = len(getattr(self, name))
            if got != want.get(name, 0):
                raise ParamError(f"expected {want.get(name, 0)} values, got {got}", field=name)
            for v in getattr(self, name):
                if not (v > 0 and math.isfinite(v)):
                    raise ParamError(f"length {v!r} must be positive", field=name)
        if st.symmetric:
            if self.alpha or self.beta or self.index is not None:
                raise ParamError("angle seeds and L/K only apply to the third sub-type",
                                 field="alpha" if self.alpha else "beta" if self.beta else "index")
            return self
        if self.index is None:
            raise ParamError("missing", field="L" if st is SubType.III_OAE else "K")
        if st is SubType.III_OAE and not (3 <= self.index <= N - 1):
            raise ParamError("OAS vertex index must satisfy 3 <= L <= N-1", field="L")
        if st is SubType.III_OAS and self.index < 1:
            raise ParamError("winding number K must be >= 1", field="K")
        need_a = self.required_alpha_indices()
        for k in need_a:
            if k not in self.alpha:
                raise ParamError("missing", field=f"alpha{k}")
        for k in (1, 2):
            if k not in self.beta:
                raise ParamError("missing", field=f"beta{k}")
        for k in self.alpha:
            if k not in need_a:
                raise ParamError("not an independent parameter", field=f"alpha{k}")
        for k in self.beta:
            if k not in (1, 2):
                raise ParamError("not an independent parameter", field=f"beta{k}")
        for name, d in (("alpha", self.alpha), ("beta", self.beta)):
            for k, v in d.items():
                if not (0.0 < v < 180.0):
                    raise ParamError("angle must lie in (0, 180) degrees", field=f"{name}{k}")
        return self


ARRAY_FIELDS = ("l", "m", "L", "alpha", "A", "beta", "gamma", "B", "Gamma")


@dataclass
class CapGeometry:
    """Resolved metric data of a suspension.

    Arrays are indexed from 0, so ``beta[k - 1]`` is beta_k.  Angles in radians.
    """
    subtype: SubType
    N: int
    l: np.ndarray
    m: np.ndarray
    L: np.ndarray
    alpha: np.ndarray
    A: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    B: np.ndarray
    Gamma: np.ndarray
    index: int | None = None
    di: int | None = None
    origin: str = ""

    @property
    def M(self) -> int:
        return self.N // 2

    def vertex_angles(self, k: int) -> VertexAngles:
        """Face angles around v_k (1-indexed, cyclic)."""
        i = (k - 1) % self.N
        j = (k - 2) % self.N
        return VertexAngles(self.beta[i], self.gamma[j], self.Gamma[j], self.B[i])

    def oas_vertices(self) -> list[int]:
        if self.subtype is SubType.III_OAE:
            return [1, self.index]
        return []

    def angles_deg(self) -> dict:
        return {name: np.degrees(getattr(self, name)) for name in ("alpha", "A", "beta", "gamma", "B", "Gamma")}

    def scaled(self, factor: float) -> "CapGeometry":
        kw = {n: getattr(self, n).copy() for n in ARRAY_FIELDS}
        for n in ("l", "m", "L"):
            kw[n] = kw[n] * factor
        return CapGeometry(self.subtype, self.N, index=self.index, di=self.di, origin=self.origin, **kw)

    def face_residuals(self) -> dict:
        """Angle-sum and law-of-sines residuals of all 2N faces."""
        N = self.N
        nxt = np.roll(np.arange(N), -1)
        ang_f = np.abs(self.alpha + self.beta + self.gamma - math.pi)
        ang_F = np.abs(self.A + self.B + self.Gamma - math.pi)
        # f_k: l_k opposite gamma_k, l_{k+1} opposite beta_k, L_k opposite alpha_k
        r_f = np.stack([self.l / np.sin(self.gamma), self.l[nxt] / np.sin(self.beta),
                        self.L / np.sin(self.alpha)])
        r_F = np.stack([self.m / np.sin(self.Gamma), self.m[nxt] / np.sin(self.B),
                        self.L / np.sin(self.A)])
        sin_f = (r_f.max(axis=0) - r_f.min(axis=0)) / r_f.mean(axis=0)
        sin_F = (r_F.max(axis=0) - r_F.min(axis=0)) / r_F.mean(axis=0)
        return {"angle_sum": float(max(ang_f.max(), ang_F.max())),
                "law_of_sines": float(max(sin_f.max(), sin_F.max()))}

    def vertex_type_residual(self) -> float:
        """Largest violation of the OAE/OAS relations at the base vertexes."""
        if self.subtype.symmetric:
            return 0.0
        oas = set(self.oas_vertices())
        worst = 0.0
        for k in range(1, self.N + 1):
            be, ga, Ga, Bk = self.vertex_angles(k)
            if k in oas:
                r = max(abs(Ga + be - math.pi), abs(Bk + ga - math.pi))
            else:
                r = max(abs(Ga - be), abs(Bk - ga))
            worst = max(worst, r)
        return worst


# ---------------------------------------------------------------- sub-types I/II

def _full_lengths(params: ParameterSet):
    N, M = params.N, params.M
    st = params.subtype
    L = list(params.L) + [0.0] * M
    if st is SubType.I_OEE:
        l = list(params.l)
        m = [l[(k + M) % N] for k in range(N)]
        for k in range(M):
            L[k + M] = L[k]
    elif st is SubType.II_AEE:
        l = list(params.l)
        m = [l[0]] + [l[N - k] for k in range(1, N)]
        for k in range(M):
            L[N - 1 - k] = L[k]
    else:
        l = list(params.l) * 2
        m = list(params.m) * 2
        for k in range(M):
            L[k + M] = L[k]
    return np.array(l, float), np.array(m, float), np.array(L, float)


def _triangle_angles(a, b, c, face):
    """Angles opposite the sides a, b, c of a planar triangle."""
    if not (a + b > c and b + c > a and a + c > b):
        raise TriangleViolation(face, f"(sides {a:g}, {b:g}, {c:g})")
    def opp(x, y, z):
        return math.acos(max(-1.0, min(1.0, (y * y + z * z - x * x) / (2.0 * y * z))))
    A = opp(a, b, c)
    B = opp(b, a, c)
    return A, B, math.pi - A - B


def geometry_from_lengths(subtype, l, m, L, index=None) -> CapGeometry:
    N = len(l)
    arr = {n: np.zeros(N) for n in ("alpha", "A", "beta", "gamma", "B", "Gamma")}
    for k in range(N):
        k1 = (k + 1) % N
        # f_k = u v_{k+1} v_k: alpha opposite L_k, beta (at v_k) opposite l_{k+1}
        al, be, ga = _triangle_angles(L[k], l[k1], l[k], f"f{k + 1}")
        arr["alpha"][k], arr["beta"][k], arr["gamma"][k] = al, be, ga
        A, Bk, Ga = _triangle_angles(L[k], m[k1], m[k], f"F{k + 1}")
        arr["A"][k], arr["B"][k], arr["Gamma"][k] = A, Bk, Ga
    return CapGeometry(subtype, N, np.asarray(l, float), np.asarray(m, float),
                       np.asarray(L, float), index=index, **arr)


def expand_type12(params: ParameterSet) -> CapGeometry:
    if not params.subtype.symmetric:
        raise ValueError("expand_type12 applies to sub-types I and II only")
    params.validate()
    l, m, L = _full_lengths(params)
    return geometry_from_lengths(params.subtype, l, m, L)


# ---------------------------------------------------------------- sub-type III

def check_folding_constraints(geom: CapGeometry) -> dict:
    """Residuals of the angle-sum constraints of the third sub-type.

    For III-OAE with OAS vertex v_L both the plain and the alternating sums of
    the apical angles split evenly at L; for III-OAS the full sum is a multiple
    of 2pi and the alternating sum vanishes.  Both apexes are checked.
    """
    N = geom.N
    sign = np.array([1.0 if k % 2 == 1 else -1.0 for k in range(1, N + 1)])
    out = {}
    for name in ("alpha", "A"):
        a = getattr(geom, name)
        if geom.subtype is SubType.III_OAE:
            Lv = geom.index
            head, tail = a[:Lv - 1], a[Lv - 1:]
            r1 = head.sum() - tail.sum()
            r2 = (sign[:Lv - 1] * head).sum() - (sign[Lv - 1:] * tail).sum()
        elif geom.subtype is SubType.III_OAS:
            r1 = a.sum() - 2.0 * geom.index * math.pi
            r2 = (sign * a).sum()
        else:
            raise ValueError("folding constraints apply to the third sub-type only")
        out[name] = (abs(float(r1)), abs(float(r2)))
    out["max"] = max(max(out["alpha"]), max(out["A"]))
    return out


class _Work:
    """Mutable 1-indexed bookkeeping for a completion in progress."""

    def __init__(self, oas):
        self.oas = oas  # oas[k] for k = 1..N
        self.l, self.m, self.L = {}, {}, {}
        self.al, self.A, self.be, self.ga, self.B, self.Ga = {}, {}, {}, {}, {}, {}

    def copy(self):
        w = _Work(self.oas)
        for n in ("l", "m", "L", "al", "A", "be", "ga", "B", "Ga"):
            setattr(w, n, dict(getattr(self, n)))
        return w

    def face_u(self, k) -> bool:
        """Face f_k from alpha_k, beta_k and l_k."""
        al, be = self.al[k], self.be[k]
        ga = math.pi - al - be
        if ga <= ANGLE_EPS or al <= ANGLE_EPS:
            return False
        self.ga[k] = ga
        lk = self.l[k]
        self.l[k + 1] = lk * math.sin(be) / math.sin(ga)
        self.L[k] = lk * math.sin(al) / math.sin(ga)
        return True

    def face_w(self, k) -> bool:
        """Face F_k from m_k, L_k and the included angle B_k."""
        m, L, Bk = self.m[k], self.L[k], self.B[k]
        self.Ga[k] = math.atan2(m * math.sin(Bk), L - m * math.cos(Bk))
        self.A[k] = math.pi - Bk - self.Ga[k]
        self.m[k + 1] = math.sqrt(m * m + L * L - 2.0 * m * L * math.cos(Bk))
        return self.A[k] > ANGLE_EPS and self.Ga[k] > ANGLE_EPS

    def relate(self, k):
        """beta_k and B_k from the angles of the previous faces at v_k."""
        if self.oas[k]:
            self.be[k] = math.pi - self.Ga[k - 1]
            self.B[k] = math.pi - self.ga[k - 1]
        else:
            self.be[k] = self.Ga[k - 1]
            self.B[k] = self.ga[k - 1]

    def mirror(self, k, angle):
        """The OAE/OAS partner of an angle at v_k."""
        return math.pi - angle if self.oas[k] else angle

    def to_geometry(self, subtype, N, index, origin) -> CapGeometry:
        def arr(d):
            return np.array([d[k] for k in range(1, N + 1)], float)
        return CapGeometry(subtype, N, arr(self.l), arr(self.m), arr(self.L), arr(self.al),
                           arr(self.A), arr(self.be), arr(self.ga), arr(self.B), arr(self.Ga),
                           index=index, origin=origin)


def _oas_flags(params: ParameterSet):
    N = params.N
    if params.subtype is SubType.III_OAE:
        return {k: k in (1, params.index) for k in range(1, N + 1)}
    return {k: False for k in range(1, N + 1)}


def _quad_roots(a, b, c):
    """Real roots of a x^2 + b x + c in (plus, minus) order."""
    disc = b * b - 4.0 * a * c
    if disc < -1e-12:
        return []
    disc = math.sqrt(max(disc, 0.0))
    if abs(a) < 1e-14:
        return [-c / b] if abs(b) > 1e-14 else []
    return [(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)]


def _k_lists(beta_a, B_b, stage_form: bool):
    """Candidate multipliers k_c (cotangent form) and k_t (tangent form).

    The first vertex pair uses (beta_1, B_3); later stages use the angles at
    v_{J-3}.
    """
    if stage_form:
        kc = [ch(B_b) * th(beta_a), th(B_b) * ch(beta_a), -th(B_b) * th(beta_a), -ch(B_b) * ch(beta_a)]
        kt = [-th(B_b) * ch(beta_a), -ch(B_b) * th(beta_a), ch(B_b) * ch(beta_a), th(B_b) * th(beta_a)]
    else:
        kc = [th(beta_a) * ch(B_b), -th(beta_a) * th(B_b), -ch(beta_a) * ch(B_b), ch(beta_a) * th(B_b)]
        kt = [ch(beta_a) * ch(B_b), -ch(beta_a) * th(B_b), -th(beta_a) * ch(B_b), th(beta_a) * th(B_b)]
    return kc, kt


def _case_coefficients(kind, k, a, b, supplementary, stage_form):
    """Quadratic coefficients for one multiplier.

    ``kind`` is 'c' when ch(x) = k * ch(y) and 't' when ch(x) = k * th(y).
    """
    if kind == "c":
        if supplementary and not stage_form:
            return k + a, 2.0 * b * k, -k * (a * k + 1.0)
        return k - a, (2.0 if supplementary else -2.0) * b * k, k * (a * k - 1.0)
    if supplementary and not stage_form:
        return k - a, 2.0 * b * k, k * (a * k - 1.0)
    return k + a, (2.0 if supplementary else -2.0) * b * k, -k * (a * k + 1.0)


def _solve_cases(kc, kt, a, b, supplementary, stage_form):
    """All admissible (x, y) half-angle cotangent pairs over the eight cases.

    x is the cotangent solved for directly; y is the partner recovered from the
    multiplier.  Both must be positive for the angles to lie in (0, pi).
    """
    out = []
    for kind, ks in (("c", kc), ("t", kt)):
        for k in ks:
            if abs(k) < 1e-300:
                continue
            for x in _quad_roots(*_case_coefficients(kind, k, a, b, supplementary, stage_form)):
                if x <= 0.0:
                    continue
                y = x / k if kind == "c" else k / x
                if y <= 0.0:
                    continue
                out.append((x, y))
    return out


def _seed(params: ParameterSet) -> tuple[_Work, list[_Work]] | None:
    """Faces 1 and 2 plus every admissible (beta_3, B_1) pair."""
    oas = _oas_flags(params)
    w = _Work(oas)
    rad = math.radians
    w.l[1] = params.l[0]
    w.al[1], w.al[2] = rad(params.alpha[1]), rad(params.alpha[2])
    w.be[1], w.be[2] = rad(params.beta[1]), rad(params.beta[2])
    if not (w.face_u(1) and w.face_u(2)):
        return None
    w.Ga[1] = w.mirror(2, w.be[2])
    w.B[2] = w.mirror(2, w.ga[1])
    w.B[3] = w.mirror(3, w.ga[2])
    L1, L2, G1, B2 = w.L[1], w.L[2], w.Ga[1], w.B[2]
    a = L2 * math.sin(G1) / (L1 * math.sin(B2))
    b = (L2 * math.cos(G1) - L1 * math.cos(B2)) / (L1 * math.sin(B2))
    kc, kt = _k_lists(w.be[1], w.B[3], stage_form=False)
    out = []
    for x, y in _solve_cases(kc, kt, a, b, oas[3], stage_form=False):
        h = w.copy()
        h.be[3] = 2.0 * math.atan(1.0 / x)
        h.B[1] = 2.0 * math.atan(1.0 / y)
        h.Ga[2] = h.mirror(3, h.be[3])
        A1 = math.pi - h.B[1] - h.Ga[1]
        A2 = math.pi - h.B[2] - h.Ga[2]
        if A1 <= ANGLE_EPS or A2 <= ANGLE_EPS:
            continue
        h.A[1], h.A[2] = A1, A2
        h.m[1] = L1 * math.sin(G1) / math.sin(A1)
        h.m[2] = L1 * math.sin(h.B[1]) / math.sin(A1)
        h.m[3] = h.m[2] * math.sin(h.B[2]) / math.sin(h.Ga[2])
        if abs(h.m[2] * math.sin(A2) / math.sin(h.Ga[2]) - L2) > 1e-8 * L2:
            continue
        out.append(h)
    return w, out


def _dedupe(geoms: list[CapGeometry]) -> list[CapGeometry]:
    out = []
    tol = math.radians(MERGE_TOL_DEG)
    for g in geoms:
        if any(max(np.abs(getattr(g, n) - getattr(o, n)).max() for n in ("alpha", "A", "beta", "B")) < tol
               for o in out):
            continue
        out.append(g)
    return out


def _final_alphas(w: _Work, params: ParameterSet):
    """alpha_{N-1}, alpha_N from the folding constraints given the others."""
    N = params.N
    known = range(1, N - 1)
    if params.subtype is SubType.III_OAS:
        K = params.index
        odd = sum(w.al[k] for k in known if k % 2 == 1)
        even = sum(w.al[k] for k in known if k % 2 == 0)
        return K * math.pi - odd, K * math.pi - even
    Lv = params.index
    def split(sgn):
        return (sum(sgn(k) * w.al[k] for k in range(1, Lv))
                - sum(sgn(k) * w.al[k] for k in range(Lv, N - 1)))
    r1 = split(lambda k: 1.0)
    r2 = split(lambda k: 1.0 if k % 2 == 1 else -1.0)
    return 0.5 * (r1 + r2), 0.5 * (r1 - r2)


def _close_general(w: _Work, params: ParameterSet, tol=1e-9) -> _Work | None:
    """Faces N-1 and N by the same recursion used for every other face."""
    N = params.N
    h = w.copy()
    h.al[N - 1], h.al[N] = _final_alphas(h, params)
    if h.al[N - 1] <= ANGLE_EPS or h.al[N] <= ANGLE_EPS:
        return None
    if not (h.face_u(N - 1) and h.face_w(N - 1)):
        return None
    h.relate(N)
    if not (h.face_u(N) and h.face_w(N)):
        return None
    res = [abs(h.l[N + 1] - h.l[1]) / h.l[1], abs(h.m[N + 1] - h.m[1]) / h.m[1],
           abs(h.mirror(1, h.Ga[N]) - h.be[1]), abs(h.mirror(1, h.ga[N]) - h.B[1])]
    if max(res) > tol:
        return None
    return h


def _close_octahedron(w: _Work, params: ParameterSet, tol=1e-9) -> _Work | None:
    """Faces 3 and 4 of an octahedron by direct assignment.

    The constraint sums fix alpha_3, alpha_4 outright; face f_3 follows from
    two angles and a side, f_4 from two sides and the included angle, F_3 from
    two sides and the included angle and F_4 from its three sides.
    """
    h = w.copy()
    if params.subtype is SubType.III_OAE:
        h.al[3], h.al[4] = h.al[1], h.al[2]
    else:
        h.al[3], h.al[4] = math.pi - h.al[1], math.pi - h.al[2]
    if not h.face_u(3):
        return None
    l4, l1, a4 = h.l[4], h.l[1], h.al[4]
    L4 = math.sqrt(l4 * l4 + l1 * l1 - 2.0 * l4 * l1 * math.cos(a4))
    h.L[4] = L4
    try:
        _, be4, ga4 = _triangle_angles(L4, l1, l4, "f4")
        h.be[4], h.ga[4] = be4, ga4
        if not h.face_w(3):
            return None
        A4, B4, Ga4 = _triangle_angles(L4, h.m[1], h.m[4], "F4")
    except TriangleViolation:
        return None
    h.A[4], h.B[4], h.Ga[4] = A4, B4, Ga4
    res = [abs(h.mirror(4, h.Ga[3]) - h.be[4]), abs(h.mirror(4, h.ga[3]) - h.B[4]),
           abs(h.mirror(1, h.Ga[4]) - h.be[1]), abs(h.mirror(1, h.ga[4]) - h.B[1])]
    if max(res) > tol:
        return None
    return h


def _require_third(params: ParameterSet):
    if params.subtype.symmetric:
        raise ValueError("completion applies to the third sub-type only")
    params.validate()


def _attach_dis(geoms, search):
    if not search:
        return geoms
    from .construction import find_flexible_di
    for g in geoms:
        g.di = find_flexible_di(g)
    return geoms


def complete_octahedron(params: ParameterSet, search_di: bool = True) -> list[CapGeometry]:
    """All completions of an octahedron seed (N = 4)."""
    _require_third(params)
    if params.N != 4:
        raise ValueError("complete_octahedron needs N = 4")
    seeded = _seed(params)
    if seeded is None:
        raise NoCompletion("seed faces are not triangles")
    out = []
    for i, h in enumerate(seeded[1]):
        done = _close_octahedron(h, params)
        if done is not None:
            out.append(done.to_geometry(params.subtype, 4, params.index, f"seed{i}"))
    out = _dedupe(out)
    if not out:
        raise NoCompletion("no coefficient case yields a realizable octahedron")
    return _attach_dis(out, search_di)


def complete_suspension(params: ParameterSet, search_di: bool = True,
                        use_filter: bool = True) -> list[CapGeometry]:
    """All completions of a seed through the face-by-face recursion.

    N = 4 is accepted as well; it then runs only the seeding step and the
    generic closure, which gives an independent route to the octahedron.
    """
    _require_third(params)
    N = params.N
    seeded = _seed(params)
    if seeded is None:
        raise NoCompletion("seed faces are not triangles")
    cands = [(f"s{i}", h) for i, h in enumerate(seeded[1])]
    if not cands:
        raise RealizabilityFailure(3)
    for J in range(5, N, 2):
        alpha_next = math.radians(params.alpha[J - 2])
        new = []
        for tag, h0 in cands:
            h = h0.copy()
            k = J - 2
            h.al[k] = alpha_next
            if not (h.face_u(k) and h.face_w(k)):
                continue
            h.relate(J - 1)
            l, m, be, Bk = h.l[J - 1], h.m[J - 1], h.be[J - 1], h.B[J - 1]
            a = m * math.sin(Bk) / (l * math.sin(be))
            b = (m * math.cos(Bk) - l * math.cos(be)) / (l * math.sin(be))
            kc, kt = _k_lists(h.be[J - 3], h.B[J - 3], stage_form=True)
            for i, (x, y) in enumerate(_solve_cases(kc, kt, a, b, h.oas[J], stage_form=True)):
                q = h.copy()
                q.B[J] = 2.0 * math.atan(1.0 / x)
                q.be[J] = 2.0 * math.atan(1.0 / y)
                q.ga[J - 1] = q.mirror(J, q.B[J])
                q.Ga[J - 1] = q.mirror(J, q.be[J])
                q.al[J - 1] = math.pi - q.be[J - 1] - q.ga[J - 1]
                q.A[J - 1] = math.pi - q.B[J - 1] - q.Ga[J - 1]
                if q.al[J - 1] <= ANGLE_EPS or q.A[J - 1] <= ANGLE_EPS:
                    continue
                if not q.face_u(J - 1):
                    continue
                L_w = q.m[J - 1] * math.sin(q.A[J - 1]) / math.sin(q.Ga[J - 1])
                if abs(L_w - q.L[J - 1]) > 1e-8 * L_w:
                    continue
                q.m[J] = q.m[J - 1] * math.sin(q.B[J - 1]) / math.sin(q.Ga[J - 1])
                if use_filter and not _prefix_filter(q, N, J):
                    continue
                new.append((f"{tag}.{i}", q))
        if not new:
            raise RealizabilityFailure(J)
        cands = new
    out = []
    for tag, h in cands:
        done = _close_general(h, params)
        if done is None:
            continue
        if use_filter and not _prefix_filter(done, N, N):
            continue
        out.append(done.to_geometry(params.subtype, N, params.index, tag))
    out = _dedupe(out)
    if not out:
        raise NoCompletion("no candidate closes the final faces")
    return _attach_dis(out, search_di)


def complete(params: ParameterSet, **kw) -> list[CapGeometry]:
    """Dispatch to the right completion for any sub-type."""
    if params.subtype.symmetric:
        return [expand_type12(params)]
    if params.N == 4:
        return complete_octahedron(params, **{k: v for k, v in kw.items() if k == "search_di"})
    return complete_suspension(params, **kw)


# ---------------------------------------------------------------- partial constructions

PAIR_TOL = 1e-6


def vertex_pairs(N: int) -> list[tuple[int, int]]:
    """Vertex pairs whose dihedrals are tied together in the third sub-type."""
    return [(1, 3)] + [(2 * k, 2 * k + 3) for k in range(1, N // 2 - 1)] + [(N - 2, N)]


def _prefix_filter(w: _Work, N: int, J: int, eps1: float = math.pi / 2) -> bool:
    angles = {}
    for k in range(2, J + 1):
        angles[k] = VertexAngles(w.be[k], w.ga[k - 1], w.Ga[k - 1], w.B[k])
    return partial_construction_search(angles, N, J, eps1, first_only=True) != []


def partial_construction_search(angles: dict, N: int, last: int, eps1: float,
                                first_only: bool = False, tol: float = PAIR_TOL):
    """Depth-first search over root choices at v_2 .. v_last.

    Pairs whose second vertex has been reached are checked as soon as
    possible: cos eps must agree, and |cos delta|, |cos Delta| must agree
    crosswise.  Returns a list of (bits, eps, delta, Delta) dicts for every
    surviving branch (bits use the same layout as the dihedral identifier).
    """
    from .geometry import vertex_dihedrals
    from .errors import FlexspanError
    partner = {k: j for j, k in vertex_pairs(N)}
    out = []
    eps = {1: eps1}
    dl, Dl = {}, {}

    def rec(k, bits):
        if k > last:
            out.append((bits, dict(eps), dict(dl), dict(Dl)))
            return first_only
        seen = None
        for bit in (1, 0):
            try:
                dk, ek, Dk = vertex_dihedrals(angles[k], eps[k - 1], bit, k)
            except FlexspanError:
                return False
            if seen is not None and abs(seen - dk) < 1e-15:
                continue
            seen = dk
            j = partner.get(k)
            if j is not None:
                if abs(math.cos(ek) - math.cos(eps[j])) > tol:
                    continue
                if j in dl:
                    if abs(abs(math.cos(dk)) - abs(math.cos(Dl[j]))) > tol:
                        continue
                    if abs(abs(math.cos(Dk)) - abs(math.cos(dl[j]))) > tol:
                        continue
            eps[k], dl[k], Dl[k] = ek, dk, Dk
            stop = rec(k + 1, bits | (bit << (k - 1)))
            del eps[k], dl[k], Dl[k]
            if stop:
                return True
        return False

    rec(2, 0)
    return out


def partial_construction_filter(geom: CapGeometry, stage: int, eps1: float = math.pi / 2) -> bool:
    """True iff a partial construction through v_stage honours every resolved pair."""
    N = geom.N
    last = min(stage, N)
    if last < 2:
        return True
    angles = {k: geom.vertex_angles(k) for k in range(2, last + 1)}
    return partial_construction_search(angles, N, last, eps1, first_only=True) != []
