import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from flexspan.errors import DegenerateVertex, NoRealRoot, Unsolvable
from flexspan.geometry import (QuadraticCoeffs, VertexAngles, angle_diff, c5_residual,
                               cap_directions, cap_directions_backward, dependent_dihedrals,
                               propagate_epsilon, quadratic_roots, rot_x, rot_z, solve_dihedral,
                               vertex_dihedrals, vertex_quadratic, vertex_rates, wrap)

I3 = np.eye(3)
angle = st.floats(0.2, math.pi - 0.2)


def test_rot_z_cases():
    assert np.allclose(rot_z(0.0), I3)
    assert np.allclose(rot_z(math.pi / 2) @ [1, 0, 0], [0, 1, 0])
    assert np.allclose(rot_z(0.7) @ rot_z(-0.7), I3, atol=1e-15)


def test_rot_x_cases():
    assert np.allclose(rot_x(0.0), I3)
    assert np.allclose(rot_x(math.pi) @ [0, 1, 0], [0, -1, 0])
    R = rot_x(1.234)
    assert np.linalg.norm(R.T @ R - I3) < 1e-12
    assert abs(np.linalg.det(R) - 1.0) < 1e-12


def test_wrap_and_diff():
    assert wrap(-0.1) == pytest.approx(2 * math.pi - 0.1)
    assert 0.0 <= wrap(2 * math.pi) < 2 * math.pi
    assert angle_diff(0.05, 2 * math.pi - 0.05) == pytest.approx(0.1)


def test_solve_dihedral_unit_roots():
    q = QuadraticCoeffs(1.0, 0.0, -1.0)
    assert solve_dihedral(q, 1) == pytest.approx(math.pi / 2)
    assert solve_dihedral(q, 0) == pytest.approx(3 * math.pi / 2)


def test_no_real_root_names_vertex():
    with pytest.raises(NoRealRoot) as exc:
        solve_dihedral(QuadraticCoeffs(1.0, 0.0, 1.0), 1, vertex=5)
    assert exc.value.vertex == 5


def test_small_negative_discriminant_clamped():
    plus, minus = quadratic_roots(QuadraticCoeffs(1.0, 2.0, 1.0 + 1e-10))
    assert plus == pytest.approx(-1.0, abs=1e-4) and minus == pytest.approx(-1.0, abs=1e-4)


def test_vanishing_leading_coefficient():
    # b > 0: the plus root stays finite, the minus root runs off to infinity (delta = pi)
    plus, minus = quadratic_roots(QuadraticCoeffs(0.0, 2.0, -1.0))
    assert plus == pytest.approx(0.5) and math.isinf(minus)
    assert solve_dihedral(QuadraticCoeffs(0.0, 2.0, -1.0), 0) == pytest.approx(math.pi)
    plus, minus = quadratic_roots(QuadraticCoeffs(0.0, -2.0, 1.0))
    assert math.isinf(plus) and minus == pytest.approx(0.5)
    # only c left: both roots at infinity
    assert solve_dihedral(QuadraticCoeffs(0.0, 0.0, 1.0), 1) == pytest.approx(math.pi)


def test_degenerate_vertex():
    # four equal face angles folded shut (eps_prev = 0) leave nothing to solve
    ang = VertexAngles(1.0, 1.0, 1.0, 1.0)
    with pytest.raises(DegenerateVertex):
        vertex_quadratic(ang, 0.0)


def test_b_vanishes_at_zero_eps():
    ang = VertexAngles(1.0, 1.1, 0.9, 1.2)
    q = vertex_quadratic(ang, 0.0)
    assert q.b == 0.0


def test_equal_angle_vertex_roots_satisfy_relation():
    ang = VertexAngles(*(math.pi / 3,) * 4)
    eps_prev = 2.0
    for branch in (0, 1):
        d = solve_dihedral(vertex_quadratic(ang, eps_prev), branch)
        assert abs(c5_residual(ang, d, eps_prev)) < 1e-10


def test_pairwise_equal_opposite_angles_keep_cos_eps():
    ang = VertexAngles(0.9, 1.3, 0.9, 1.3)
    eps_prev = 1.1
    for branch in (0, 1):
        d = solve_dihedral(vertex_quadratic(ang, eps_prev), branch)
        e = propagate_epsilon(ang, d, eps_prev)
        assert math.cos(e) == pytest.approx(math.cos(eps_prev), abs=1e-12)


def test_flat_vertex_keeps_pi():
    a = math.radians(80.0)
    b = math.radians(100.0)
    ang = VertexAngles(a, b, a, b)
    assert propagate_epsilon(ang, math.pi, math.pi) == pytest.approx(math.pi, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(angle, angle, angle, angle, st.floats(0.0, 2 * math.pi))
def test_roots_round_trip(a1, a2, a3, a4, eps_prev):
    ang = VertexAngles(a1, a2, a3, a4)
    try:
        q = vertex_quadratic(ang, eps_prev)
    except DegenerateVertex:
        assume(False)
    assume(q.discriminant > 1e-6)
    ds = [solve_dihedral(q, b) for b in (0, 1)]
    assert abs(angle_diff(ds[0], ds[1])) > 0.0
    for d in ds:
        assert abs(c5_residual(ang, d, eps_prev)) < 1e-9


@settings(max_examples=100, deadline=None)
@given(angle, angle, angle, angle, st.floats(0.1, 2 * math.pi - 0.1))
def test_vertex_rates_match_differences(a1, a2, a3, a4, eps_prev):
    ang = VertexAngles(a1, a2, a3, a4)
    q = vertex_quadratic(ang, eps_prev)
    assume(q.discriminant > 1e-3)
    h = 1e-6
    for branch in (0, 1):
        d, e, D = vertex_dihedrals(ang, eps_prev, branch)
        dp = vertex_dihedrals(ang, eps_prev + h, branch)
        dm = vertex_dihedrals(ang, eps_prev - h, branch)
        fd = [angle_diff(p, m) / (2 * h) for p, m in zip(dp, dm)]
        rates = vertex_rates(ang, d, eps_prev, 1.0)
        assume(max(abs(r) for r in rates) < 1e3)
        assert np.allclose(rates, fd, atol=1e-4 * (1 + max(abs(r) for r in rates)))


@settings(max_examples=150, deadline=None)
@given(st.sampled_from([4, 6, 8]), st.integers(0, 2**32 - 1), st.sampled_from([0, 1]))
def test_dependent_dihedrals_close_both_ways(n, seed, branch):
    rng = np.random.default_rng(seed)
    al = rng.uniform(0.3, 1.3, n)
    known = rng.uniform(0.0, 2 * math.pi, n - 3)
    try:
        dep = dependent_dihedrals(al, known, branch)
    except Unsolvable:
        assume(False)
    ds = list(known) + list(dep)
    fwd = cap_directions(al, ds)
    bwd = cap_directions_backward(al, ds)
    for f, b in zip(fwd, bwd):
        assert np.linalg.norm(f - b) < 1e-9


def test_dependent_dihedrals_planar_cap():
    for al in ([60, 100, 90, 110], [50, 70, 90, 60, 40, 50]):
        a = [math.radians(x) for x in al]
        for branch in (0, 1):
            got = dependent_dihedrals(a, [math.pi] * (len(a) - 3), branch)
            assert np.allclose(got, math.pi, atol=1e-9)


def test_dependent_dihedrals_regular_tetrahedral_cap():
    # u at the apex of a regular octahedron: four face angles of 60 degrees
    a = [math.pi / 3] * 4
    known = [math.acos(-1.0 / 3.0)]
    got = dependent_dihedrals(a, known, 1) + dependent_dihedrals(a, known, 0)
    want = math.acos(-1.0 / 3.0)
    assert any(abs(angle_diff(x, want)) < 1e-9 for x in got)
