import dataclasses
import math

import numpy as np
import pytest

from flexspan import fixtures
from flexspan.errors import NoCompletion, ParamError
from flexspan.params import (ParameterSet, SubType, check_folding_constraints, complete,
                             complete_octahedron, complete_suspension, expand_type12,
                             partial_construction_filter)

from conftest import completions, table_geometry

THIRD = [n for n, fx in fixtures.CATALOG.items() if not fx.subtype.symmetric]


def test_expand_first_subtype_lengths():
    g = expand_type12(fixtures.get("D-I#1").params())
    assert tuple(g.m) == (12.0, 13.0, 10.0, 11.0)
    assert tuple(g.L) == (8.0, 9.0, 8.0, 9.0)


def test_expand_second_subtype_lengths():
    g = expand_type12(fixtures.get("D-II#1").params())
    assert tuple(g.m) == (10.0, 13.0, 12.0, 11.0)
    assert tuple(g.L) == (5.0, 4.0, 4.0, 5.0)


def test_expand_all_equal():
    p = ParameterSet(SubType.II_OEE, 6, l=(10.0,) * 3, m=(10.0,) * 3, L=(7.0,) * 3)
    g = expand_type12(p)
    assert np.allclose(g.l, 10.0) and np.allclose(g.m, 10.0) and np.allclose(g.L, 7.0)
    assert np.allclose(g.alpha, g.A) and np.allclose(g.beta, g.gamma)


@pytest.mark.parametrize("name", [n for n, fx in fixtures.CATALOG.items() if fx.subtype.symmetric])
def test_symmetric_faces_are_triangles(name):
    g = table_geometry(name)
    r = g.face_residuals()
    assert r["angle_sum"] < 1e-12 and r["law_of_sines"] < 1e-12


def test_folding_constraints_hold_and_break():
    for name in ("D-IV#1", "D-V#1"):
        g = table_geometry(name)
        assert check_folding_constraints(g)["max"] < 1e-12
        bent = dataclasses.replace(g, alpha=g.alpha.copy())
        bent.alpha[0] += math.radians(0.01)
        assert check_folding_constraints(bent)["max"] > 1e-5


def _betas(g):
    return np.degrees(g.beta)


def test_octahedron_completion_values():
    g = [x for x in complete_octahedron(fixtures.get("D-IV#1").params()) if x.di == 9][0]
    assert _betas(g)[2] == pytest.approx(112.12184, abs=5e-6)
    assert _betas(g)[3] == pytest.approx(87.83527, abs=5e-6)
    assert math.degrees(g.alpha[3]) == pytest.approx(30.0, abs=1e-9)
    g = [x for x in complete_octahedron(fixtures.get("D-V#1").params()) if x.di == 3][0]
    assert _betas(g)[2] == pytest.approx(82.95205, abs=5e-6)
    assert _betas(g)[3] == pytest.approx(50.47518, abs=5e-6)
    assert math.degrees(g.alpha[3]) == pytest.approx(70.0, abs=1e-9)


def test_symmetric_seed_pairs_swap():
    p = ParameterSet(SubType.III_OAS, 4, l=(10.0,), index=1, alpha={1: 60.0, 2: 60.0},
                     beta={1: 40.0, 2: 40.0})
    pairs = {tuple(np.round(_betas(g)[2:4], 6)) for g in complete_octahedron(p, search_di=False)}
    assert pairs and all((b, a) in pairs for a, b in pairs)
    assert any(a != b for a, b in pairs)


@pytest.mark.parametrize("name", ["D-IV#1", "D-V#1"])
def test_two_octahedron_routes_agree(name):
    p = fixtures.get(name).params()
    a = complete_octahedron(p, search_di=False)
    b = complete_suspension(p, search_di=False)
    assert len(a) == len(b)
    key = lambda g: tuple(np.round(g.beta, 6))
    for ga, gb in zip(sorted(a, key=key), sorted(b, key=key)):
        for f in ("alpha", "A", "beta", "gamma", "B", "Gamma", "m", "L"):
            assert np.max(np.abs(getattr(ga, f) - getattr(gb, f))) < 1e-9


@pytest.mark.parametrize("name", ["D-IV#2", "D-V#2", "D-IV#4", "D-V#3"])
def test_completion_reproduces_printed_angles(name):
    fx = fixtures.get(name)
    g = table_geometry(name)
    for sym, vals in fx.expected_angles().items():
        arr = np.degrees(getattr(g, sym))
        for k, v in vals.items():
            assert arr[k - 1] == pytest.approx(v, abs=5e-6), f"{sym}{k}"


@pytest.mark.parametrize("name", THIRD)
def test_completions_are_consistent(name):
    for g in completions(name):
        r = g.face_residuals()
        assert r["angle_sum"] < 1e-10 and r["law_of_sines"] < 1e-9
        assert g.vertex_type_residual() < 1e-10
        assert check_folding_constraints(g)["max"] < 1e-10


def _predicted_A(g):
    N, Lv, P = g.N, g.index, math.pi
    al = lambda k: g.alpha[(k - 1) % N]
    be = lambda k: g.beta[(k - 1) % N]
    out = []
    for k in range(1, N + 1):
        if k == 1:
            out.append(P - al(N) - be(N) - be(2))
        elif k == Lv - 1:
            out.append(-P + al(Lv - 2) + be(Lv - 2) + be(Lv))
        elif k == Lv:
            out.append(P - al(Lv - 1) - be(Lv - 1) - be(Lv + 1))
        elif k == N:
            out.append(-P + al(N - 1) + be(N - 1) + be(1))
        else:
            out.append(al(k - 1) + be(k - 1) - be(k + 1))
    return np.array(out)


@pytest.mark.parametrize("name", [n for n in THIRD if n.startswith("D-IV")])
def test_lower_apex_angles_follow_closed_form(name):
    for g in completions(name):
        assert np.max(np.abs(g.A - _predicted_A(g))) < 1e-10


def test_filter_accepts_complete_geometries():
    for name in ("D-IV#4", "D-V#3"):
        for g in completions(name):
            for stage in range(2, g.N + 1):
                assert partial_construction_filter(g, stage)


def test_filter_rejects_extra_candidates():
    p = fixtures.get("D-IV#2").params()
    kept = complete_suspension(p, search_di=False)
    every = complete_suspension(p, search_di=False, use_filter=False)
    assert (len(kept), len(every)) == (3, 5)
    key = lambda g: tuple(np.round(g.beta, 8))
    extra = set(map(key, every)) - set(map(key, kept))
    assert extra
    for g in every:
        if key(g) in extra:
            assert not partial_construction_filter(g, g.N)


def test_filter_small_stage_is_vacuous():
    g = table_geometry("D-IV#2")
    assert partial_construction_filter(g, 1)


def test_param_errors():
    with pytest.raises(ParamError) as exc:
        ParameterSet(SubType.I_OEE, 5, l=(1.0,) * 5, L=(1.0,) * 2).validate()
    assert exc.value.field == "N"
    with pytest.raises(ParamError):
        ParameterSet(SubType.I_OEE, 4, l=(1.0,) * 3, L=(1.0,) * 2).validate()
    with pytest.raises(ParamError) as exc:
        ParameterSet(SubType.III_OAE, 6, l=(10.0,), index=3, alpha={1: 45.0, 2: 30.0},
                     beta={1: 55.0, 2: 20.0}).validate()
    assert exc.value.field == "alpha3"
    with pytest.raises(ParamError):
        ParameterSet(SubType.III_OAE, 6, l=(10.0,), index=2, alpha={1: 45.0, 2: 30.0, 3: 25.0},
                     beta={1: 55.0, 2: 20.0}).validate()
    with pytest.raises(ParamError):
        ParameterSet(SubType.III_OAS, 4, l=(10.0,), index=1, alpha={1: 45.0, 2: 190.0},
                     beta={1: 55.0, 2: 20.0}).validate()


def test_unrealizable_seed_raises():
    p = ParameterSet(SubType.III_OAE, 4, l=(10.0,), index=3, alpha={1: 120.0, 2: 120.0},
                     beta={1: 70.0, 2: 70.0})
    with pytest.raises(NoCompletion):
        complete(p)
