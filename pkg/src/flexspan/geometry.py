"""Rotation primitives and the spherical-quadrilateral relations of an index-4 vertex.

A base vertex v_k of a suspension is met by four edges.  Going around the
vertex the edges are e1 = v_k v_{k+1}, e2 = v_k u, e3 = v_k v_{k-1} and
e4 = v_k w, separated by the face angles

    a1 = beta_k, a2 = gamma_{k-1}, a3 = Gamma_{k-1}, a4 = B_k

and carrying the dihedrals d1 = eps_k, d2 = delta_k, d3 = eps_{k-1},
d4 = Delta_k.  Everything in this module works on unit direction vectors, so
no edge length appears anywhere.
"""

from __future__ import annotations

import math
import sys
from typing import NamedTuple

import numpy as np

from .errors import (DegenerateQuadratic, DegenerateVertex, NoRealRoot,
                     OutOfRange, Unsolvable)

TWO_PI = 2.0 * math.pi
EPS = sys.float_info.epsilon
DISC_TOL = 1e-9
COEF_TOL = 1e-12

X_AXIS = np.array([1.0, 0.0, 0.0])


def cross3(a, b) -> np.ndarray:
    """Cross product of two 3-vectors (much cheaper than np.cross for single vectors)."""
    return np.array([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])


def rot_z(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_x(delta: float) -> np.ndarray:
    c, s = math.cos(delta), math.sin(delta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def d_rot_x(delta: float) -> np.ndarray:
    """Derivative of rot_x with respect to its angle."""
    c, s = math.cos(delta), math.sin(delta)
    return np.array([[0.0, 0.0, 0.0], [0.0, -s, -c], [0.0, c, -s]])


def wrap(x: float) -> float:
    """Map an angle into [0, 2pi)."""
    y = math.fmod(x, TWO_PI)
    if y < 0.0:
        y += TWO_PI
    if y >= TWO_PI:
        y = 0.0
    return y


def angle_diff(x: float, y: float) -> float:
    """Smallest signed difference x - y modulo 2pi, in (-pi, pi]."""
    d = math.remainder(x - y, TWO_PI)
    return math.pi if d == -math.pi else d


# half-angle helpers used by the octahedron and recursive completions

def th(x: float) -> float:
    return math.tan(0.5 * x)


def ch(x: float) -> float:
    return 1.0 / math.tan(0.5 * x)


def b1(beta: float, B: float) -> float:
    return ch(beta) * ch(B) + th(beta) * th(B)


def b2(beta: float, B: float) -> float:
    return ch(beta) * th(B) + th(beta) * ch(B)


class VertexAngles(NamedTuple):
    """Face angles around a base vertex v_k, in radians."""
    beta: float        # beta_k
    gamma_prev: float  # gamma_{k-1}
    Gamma_prev: float  # Gamma_{k-1}
    B: float           # B_k

    def check(self):
        for name, v in zip(self._fields, self):
            if not (0.0 < v < math.pi):
                raise DegenerateVertex(f"face angle {name}={v!r} outside (0, pi)")


class QuadraticCoeffs(NamedTuple):
    a: float
    b: float
    c: float

    @property
    def discriminant(self) -> float:
        return self.b * self.b - 4.0 * self.a * self.c


def _c5_terms(angles: VertexAngles):
    be, ga, Ga, Bk = angles
    sb, cb = math.sin(be), math.cos(be)
    sg, cg = math.sin(ga), math.cos(ga)
    sG, cG = math.sin(Ga), math.cos(Ga)
    A = sb * cg * sG
    B = -sb * sG
    C = -sb * sg * cG
    D = -cb * sg * sG
    E = math.cos(Bk) - cb * cg * cG
    return A, B, C, D, E


def c5_residual(angles: VertexAngles, delta: float, eps_prev: float) -> float:
    """Left side of the vertex closure relation; zero on a consistent vertex."""
    A, B, C, D, E = _c5_terms(angles)
    cd, sd = math.cos(delta), math.sin(delta)
    ce, se = math.cos(eps_prev), math.sin(eps_prev)
    return A * cd * ce + B * sd * se + C * cd + D * ce + E


def vertex_quadratic(angles: VertexAngles, eps_prev: float) -> QuadraticCoeffs:
    """Quadratic in t = tan(delta_k / 2) obtained from the closure relation."""
    A, B, C, D, E = _c5_terms(angles)
    ce, se = math.cos(eps_prev), math.sin(eps_prev)
    a = (E - C) + (D - A) * ce
    b = 2.0 * B * se
    c = (E + C) + (D + A) * ce
    if abs(a) < COEF_TOL and abs(b) < COEF_TOL and abs(c) < COEF_TOL:
        raise DegenerateVertex("all quadratic coefficients vanish")
    return QuadraticCoeffs(a, b, c)


def quadratic_roots(coeffs: QuadraticCoeffs, vertex: int | None = None) -> tuple[float, float]:
    """(plus root, minus root) of the vertex quadratic.

    Roots are in t = tan(delta/2).  When the leading coefficient vanishes one
    root moves to infinity (delta = pi); it keeps the label it tends to.
    """
    a, b, c = coeffs
    disc = b * b - 4.0 * a * c
    if disc < -DISC_TOL:
        raise NoRealRoot(vertex, disc)
    # a discriminant inside its own rounding error is a double root; taking the
    # square root of the noise would cost half the digits
    if abs(disc) <= 32.0 * EPS * (abs(a) + abs(b) + abs(c)) ** 2:
        disc = 0.0
    sq = math.sqrt(max(disc, 0.0))
    if abs(a) < COEF_TOL:
        if abs(b) < COEF_TOL:
            if abs(c) < COEF_TOL:
                raise DegenerateQuadratic("all coefficients vanish")
            return math.inf, math.inf
        t = -c / b
        return (t, math.inf) if b > 0.0 else (math.inf, t)
    # numerically stable pair
    if b >= 0.0:
        q = -0.5 * (b + sq)
    else:
        q = -0.5 * (b - sq)
    r1 = q / a
    r2 = c / q if q != 0.0 else r1
    plus = (-b + sq) / (2.0 * a)
    # keep the labelling of the textbook formula, the stable values only fix precision
    if abs(r1 - plus) <= abs(r2 - plus):
        return r1, r2
    return r2, r1


def solve_dihedral(coeffs: QuadraticCoeffs, branch: int, vertex: int | None = None) -> float:
    """delta in [0, 2pi) for the root picked by ``branch`` (1 = plus root)."""
    plus, minus = quadratic_roots(coeffs, vertex)
    t = plus if branch else minus
    return wrap(2.0 * math.atan(t))


def _chain(a1, a2, a3, x1, x2):
    """Az(a1) Px(pi - x1) Az(a2) Px(pi - x2) Az(a3) applied to the x axis.

    Scalar implementation; this is the innermost loop of every search.
    """
    c, s = math.cos(a3), math.sin(a3)
    x, y, z = c, s, 0.0
    t = math.pi - x2
    ct, st = math.cos(t), math.sin(t)
    y, z = ct * y - st * z, st * y + ct * z
    c, s = math.cos(a2), math.sin(a2)
    x, y = c * x - s * y, s * x + c * y
    t = math.pi - x1
    ct, st = math.cos(t), math.sin(t)
    y, z = ct * y - st * z, st * y + ct * z
    c, s = math.cos(a1), math.sin(a1)
    x, y = c * x - s * y, s * x + c * y
    return x, y, z


def propagate_epsilon(angles: VertexAngles, delta_k: float, eps_prev: float) -> float:
    """eps_k on the edge v_k v_{k+1} from delta_k and eps_{k-1}."""
    be, ga, Ga, Bk = angles
    cos_e = (math.cos(ga) * math.cos(Ga) + math.sin(ga) * math.sin(Ga) * math.cos(eps_prev)
             - math.cos(be) * math.cos(Bk)) / (math.sin(be) * math.sin(Bk))
    if abs(cos_e) > 1.0 + 1e-9:
        raise OutOfRange(f"|cos eps_k| = {abs(cos_e):.12g} exceeds 1")
    _, y, z = _chain(be, ga, Ga, delta_k, eps_prev)
    return wrap(math.atan2(z, y))


def opposite_dihedral(angles: VertexAngles, delta_k: float, eps_k: float) -> float:
    """Delta_k on the edge v_k w, from the two dihedrals flanking the face beta_k."""
    be, ga, Ga, Bk = angles
    _, y, z = _chain(Bk, be, ga, eps_k, delta_k)
    return wrap(math.atan2(z, y))


def vertex_dihedrals(angles: VertexAngles, eps_prev: float, branch: int,
                     vertex: int | None = None) -> tuple[float, float, float]:
    """(delta_k, eps_k, Delta_k) at a base vertex for one root choice."""
    delta = solve_dihedral(vertex_quadratic(angles, eps_prev), branch, vertex)
    eps = propagate_epsilon(angles, delta, eps_prev)
    Delta = opposite_dihedral(angles, delta, eps)
    return delta, eps, Delta


def branch_of(angles: VertexAngles, eps_prev: float, delta: float) -> int:
    """Which root of the vertex quadratic reproduces a given delta_k."""
    plus, minus = quadratic_roots(vertex_quadratic(angles, eps_prev))
    got = [wrap(2.0 * math.atan(t)) for t in (plus, minus)]
    dp = abs(angle_diff(got[0], delta))
    dm = abs(angle_diff(got[1], delta))
    return 1 if dp <= dm else 0


def _chain_vec(a1, a2, a3, x1, x2):
    return rot_z(a1) @ rot_x(math.pi - x1) @ rot_z(a2) @ rot_x(math.pi - x2) @ rot_z(a3) @ X_AXIS


def _chain_grad(a1, a2, a3, x1, x2):
    """Partial derivatives of the chain vector with respect to x1 and x2."""
    Z1, Z2, Z3 = rot_z(a1), rot_z(a2), rot_z(a3)
    P1, P2 = rot_x(math.pi - x1), rot_x(math.pi - x2)
    g1 = -(Z1 @ d_rot_x(math.pi - x1) @ Z2 @ P2 @ Z3 @ X_AXIS)
    g2 = -(Z1 @ P1 @ Z2 @ d_rot_x(math.pi - x2) @ Z3 @ X_AXIS)
    return g1, g2


def _atan2_rate(vec, dvec):
    y, z = vec[1], vec[2]
    r2 = y * y + z * z
    if r2 < 1e-24:
        raise ZeroDivisionError
    return (y * dvec[2] - z * dvec[1]) / r2


def vertex_rates(angles: VertexAngles, delta: float, eps_prev: float,
                 deps_prev: float) -> tuple[float, float, float]:
    """Rates (d delta_k, d eps_k, d Delta_k) given the rate of eps_{k-1}.

    delta_k follows from implicit differentiation of the closure relation;
    eps_k and Delta_k from differentiating the rotation chains that define them.
    """
    from .errors import SingularDerivative
    A, B, C, D, E = _c5_terms(angles)
    cd, sd = math.cos(delta), math.sin(delta)
    ce, se = math.cos(eps_prev), math.sin(eps_prev)
    f_d = -A * sd * ce + B * cd * se - C * sd
    f_e = -A * cd * se + B * sd * ce - D * se
    if abs(f_d) < 1e-9:
        raise SingularDerivative("vertex relation is stationary in delta")
    ddelta = -f_e / f_d * deps_prev
    be, ga, Ga, Bk = angles
    e4 = _chain_vec(be, ga, Ga, delta, eps_prev)
    g1, g2 = _chain_grad(be, ga, Ga, delta, eps_prev)
    deps = _atan2_rate(e4, g1 * ddelta + g2 * deps_prev)
    eps = wrap(math.atan2(e4[2], e4[1]))
    e3 = _chain_vec(Bk, be, ga, eps, delta)
    h1, h2 = _chain_grad(Bk, be, ga, eps, delta)
    dDelta = _atan2_rate(e3, h1 * deps + h2 * ddelta)
    return ddelta, deps, dDelta


def cap_directions(alphas, deltas) -> list[np.ndarray]:
    """Unit directions u->v_1 .. u->v_N of a cap built forward from v_1.

    ``deltas[i]`` is the dihedral on the edge to v_{i+1}; only entries
    1..N-2 are used.
    """
    n = len(alphas)
    out = [X_AXIS.copy()]
    M = rot_z(alphas[0])
    out.append(M @ X_AXIS)
    for i in range(1, n - 1):
        M = M @ rot_x(math.pi - deltas[i]) @ rot_z(alphas[i])
        out.append(M @ X_AXIS)
    return out


def cap_directions_backward(alphas, deltas) -> list[np.ndarray]:
    """Same directions reached by going backwards from v_1 through v_N."""
    n = len(alphas)
    out = [None] * n
    out[0] = X_AXIS.copy()
    M = rot_x(deltas[0] - math.pi) @ rot_z(-alphas[n - 1])
    out[n - 1] = M @ X_AXIS
    for i in range(n - 2, 0, -1):
        M = M @ rot_x(deltas[i + 1] - math.pi) @ rot_z(-alphas[i])
        out[i] = M @ X_AXIS
    return out


def dependent_dihedrals(face_angles, known_dihedrals, branch: int = 1):
    """The three cap dihedrals left free once delta_1 .. delta_{N-3} are fixed.

    Returns (delta_{N-2}, delta_{N-1}, delta_N).  The underlying system has two
    solutions in general; ``branch`` picks one of them.
    """
    al = list(face_angles)
    n = len(al)
    if n < 4 or len(known_dihedrals) != n - 3:
        raise ValueError("need N >= 4 face angles and N-3 known dihedrals")
    s_far = math.sin(al[n - 3])
    if abs(s_far) < 1e-12:
        raise Unsolvable("sin(alpha_{N-2}) vanishes")
    M = rot_z(al[n - 1])
    for i in range(n - 3):
        M = M @ rot_x(math.pi - known_dihedrals[i]) @ rot_z(al[i])
    m1, m2, m3 = M[0, 0], M[1, 0], M[2, 0]
    ca1, sa1 = math.cos(al[n - 2]), math.sin(al[n - 2])
    rho = math.hypot(m2, m3)
    if rho < 1e-12 or abs(sa1) < 1e-12:
        raise Unsolvable("closing edge direction is degenerate")
    rhs = (math.cos(al[n - 3]) - m1 * ca1) / sa1
    ratio = rhs / rho
    if abs(ratio) > 1.0 + 1e-9:
        raise Unsolvable("closing equations are inconsistent")
    if abs(abs(ratio) - 1.0) < 64.0 * EPS:
        # tangent closing configuration; acos would turn the rounding into sqrt(eps)
        ratio = math.copysign(1.0, ratio)
    ratio = max(-1.0, min(1.0, ratio))
    phi = math.atan2(m3, m2)
    dN = phi + (math.acos(ratio) if branch else -math.acos(ratio))
    cN, sN = math.cos(dN), math.sin(dN)
    proj = m2 * cN + m3 * sN
    dN1 = math.atan2(m2 * sN - m3 * cN, m1 * sa1 - ca1 * proj)
    P = M.T
    r = np.array([ca1, sa1 * cN, sa1 * sN])
    y = P[1] @ r
    z = P[2] @ r
    dN2 = math.atan2(z, -y)
    return wrap(dN2), wrap(dN1), wrap(dN)
