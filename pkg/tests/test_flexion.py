import math

import numpy as np
import pytest

from flexspan import fixtures
from flexspan.construction import construct, measure_dihedrals
from flexspan.errors import AliasWarning, FlexspanError
from flexspan.flexion import (FlexState, continuity_adjust, derivative_state, enumerate_foldings,
                              find_flexion_range, flexibility_test, is_flexible_at, sweep, track)
from flexspan.params import expand_type12, geometry_from_lengths

from conftest import table_geometry

rad = math.radians


def _state(delta):
    z = np.zeros(len(delta))
    return FlexState(0.0, np.array(delta, float), z.copy(), z.copy(), z, z, z, None, None, None, 0.0)


def test_continuity_adjust_unwraps_whole_turns():
    trace = [_state([x]) for x in (6.0, 6.2, 0.1, 0.3)]
    continuity_adjust(trace)
    got = [s.delta[0] for s in trace]
    assert np.allclose(got, [6.0, 6.2, 0.1 + 2 * math.pi, 0.3 + 2 * math.pi])
    assert [s.raw[0][0] for s in trace] == [6.0, 6.2, 0.1, 0.3]


def test_continuity_adjust_keeps_values_non_negative():
    trace = [_state([x]) for x in (0.2, 0.1, 6.2)]
    continuity_adjust(trace)
    assert min(s.delta[0] for s in trace) >= 0.0
    assert trace[0].delta[0] - trace[2].delta[0] == pytest.approx(0.2 - (6.2 - 2 * math.pi))


def test_continuity_adjust_warns_on_coarse_sampling():
    trace = [_state([x]) for x in (0.0, 2.0, 4.0)]
    with pytest.warns(AliasWarning):
        continuity_adjust(trace)


@pytest.mark.parametrize("name,form,first", [
    ("D-I#1", "two-intervals", (25.393, 162.005)),
    ("D-II#1", "single-interval", (21.857, 338.143)),
    ("D-III#1", "single-interval", (33.258, 326.742)),
])
def test_symmetric_range_forms(name, form, first):
    g = table_geometry(name)
    found = enumerate_foldings(g)
    assert len(found) == 2
    for di, rng in found:
        assert rng.form == form
        lo, hi = rng.degrees()[0]
        assert (lo, hi) == pytest.approx(first, abs=1e-3)
        assert not rng.contains(rad(lo - 0.5)) and rng.contains(rad(lo + 0.5))


def test_range_is_mirror_symmetric():
    _, rng = enumerate_foldings(table_geometry("D-I#1"))[0]
    (a, b), (c, d) = rng.degrees()
    assert a + d == pytest.approx(360.0, abs=1e-3) and b + c == pytest.approx(360.0, abs=1e-3)


def test_full_circle_ranges():
    found = enumerate_foldings(table_geometry("D-I#2"))
    assert sorted(di for di, _ in found) == [0x7, 0x15, 0x2B, 0x39]
    assert all(r.form == "full-circle" for _, r in found)
    g = table_geometry("D-IV#1")
    assert find_flexion_range(g, g.di).form == "full-circle"


def test_outside_range_is_not_flexible():
    g = table_geometry("D-I#1")
    assert not is_flexible_at(g, rad(10.0), 0x9)
    assert is_flexible_at(g, rad(90.0), 0x9)


def test_tracking_crosses_flat_positions():
    g = table_geometry("D-V#1")
    seed = construct(g, math.pi / 2, g.di)
    embs = track(g, g.di, [math.pi / 2 + rad(i) for i in range(361)], seed)
    assert len(embs) == 361
    assert max(e.closure for e in embs) < 1e-8
    labels = [embs[0].di]
    for e in embs[1:]:
        if e.di != labels[-1]:
            labels.append(e.di)
    assert labels[0] == labels[-1] == g.di and len(labels) > 2


def test_sweep_stays_flexible():
    g = table_geometry("D-IV#2")
    rng = find_flexion_range(g, g.di)
    L2 = g.L[-1] ** 2
    states = sweep(g, g.di, rng, step=10.0)
    assert len(states) >= 30
    assert max(abs(s.eq10) for s in states) < 1e-6 * L2


def test_rigid_isomer_has_nonzero_rate():
    g0 = expand_type12(fixtures.get("D-I#1").params())
    l = g0.l.copy()
    l[2] += 0.3
    g = geometry_from_lengths(g0.subtype, l, g0.m, g0.L)

    def gap(e):
        emb = construct(g, e, 2)
        return np.linalg.norm(emb.v[-1] - emb.v[0]) - g.L[-1]

    a, b = rad(295.0), rad(296.0)
    assert gap(a) * gap(b) < 0
    for _ in range(60):
        c = 0.5 * (a + b)
        a, b = (a, c) if gap(a) * gap(c) <= 0 else (c, b)
    assert construct(g, c, 2).closure < 1e-12
    assert abs(flexibility_test(g, c, 2)) > 1.0
    assert not is_flexible_at(g, c, 2)


@pytest.mark.parametrize("name", ["D-II#2", "D-IV#3"])
def test_rates_match_differences(name):
    g = table_geometry(name)
    di = g.di if g.di is not None else enumerate_foldings(g)[0][0]
    h = 1e-5
    for e in (rad(70.0), rad(100.0)):
        try:
            s = derivative_state(g, construct(g, e, di))
            sp = derivative_state(g, construct(g, e + h, di))
            sm = derivative_state(g, construct(g, e - h, di))
        except FlexspanError:
            continue
        fd = np.angle(np.exp(1j * (sp.dihedrals() - sm.dihedrals()))) / (2 * h)
        assert np.max(np.abs(fd - s.rates())) < 1e-5
        fv = (sp.embedding.v - sm.embedding.v) / (2 * h)
        assert np.max(np.abs(fv - s.v_dot)) < 1e-5


def test_enumeration_cap():
    with pytest.raises(ValueError):
        enumerate_foldings(table_geometry("D-I#7"), max_n=14)


@pytest.mark.parametrize("name", ["D-IV#2", "D-V#2"])
def test_third_subtype_mirror_symmetry(name):
    # each dihedral at 2pi - eps1 equals its value at eps1 or its conjugate
    g = table_geometry(name)
    seed = construct(g, math.pi / 2, g.di)
    embs = track(g, g.di, [math.pi / 2 + rad(i) for i in range(361)], seed)
    by = {round(math.degrees(e.eps1)) % 360: e for e in embs}
    for a in range(5, 356, 7):
        d1 = np.concatenate(measure_dihedrals(by[a]))
        d2 = np.concatenate(measure_dihedrals(by[360 - a]))
        same = np.abs(np.angle(np.exp(1j * (d2 - d1))))
        conj = np.abs(np.angle(np.exp(1j * (d2 + d1))))
        assert np.max(np.minimum(same, conj)) < 1e-6


def test_isolated_passing_samples_are_not_a_range():
    # near 42 deg this folding is nearly rigid and passes the test only at 42 and 43
    rng = find_flexion_range(table_geometry("D-III#7"), 0x4b4b)
    assert rng.form == "single-interval"
    assert rng.degrees()[0] == pytest.approx((213.143, 354.930), abs=1e-3)
