import math

import numpy as np
import pytest

from flexspan.construction import construct
from flexspan.errors import DegenerateStar
from flexspan.flexion import build, derivative_state, enumerate_foldings, find_flexion_range
from flexspan.params import SubType
from flexspan.validation import (constant_solid_vertices, dihedral_relations, embedding_dihedrals,
                                 mesh_dihedrals, mesh_volume, oriented_volume, solid_angle,
                                 solid_angle_pairs, total_mean_curvature, validate_full,
                                 vertex_solid_angles)

from conftest import table_geometry

CUBE = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
                 [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]], float)
CUBE_FACES = [(0, 2, 1), (0, 3, 2), (4, 5, 6), (4, 6, 7), (0, 1, 5), (0, 5, 4),
              (1, 2, 6), (1, 6, 5), (2, 3, 7), (2, 7, 6), (3, 0, 4), (3, 4, 7)]
TET = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], float)
TET_FACES = [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)]


def test_cube_volume_and_orientation():
    assert mesh_volume(CUBE, CUBE_FACES) == pytest.approx(1.0)
    flipped = [f[::-1] for f in CUBE_FACES]
    assert mesh_volume(CUBE, flipped) == pytest.approx(-1.0)
    one_off = [CUBE_FACES[0][::-1]] + CUBE_FACES[1:]
    assert mesh_volume(CUBE, one_off) != pytest.approx(1.0)


def test_volume_scales_cubically():
    assert mesh_volume(2.0 * TET, TET_FACES) == pytest.approx(8.0 * mesh_volume(TET, TET_FACES))


def test_volume_ignores_relabelling():
    perm = np.array([2, 0, 3, 1])
    inv = np.argsort(perm)
    faces = [tuple(inv[i] for i in f) for f in TET_FACES]
    assert mesh_volume(TET[perm], faces) == pytest.approx(mesh_volume(TET, TET_FACES))


def test_cube_corner_solid_angle():
    table = mesh_dihedrals(CUBE, CUBE_FACES)
    square_edges = [(0, 1), (0, 3), (0, 4)]
    assert all(table[e] == pytest.approx(math.pi / 2) for e in square_edges)
    assert solid_angle([table[e] for e in square_edges]) == pytest.approx(math.pi / 2)


def test_tetrahedron_dihedrals():
    table = mesh_dihedrals(TET, TET_FACES)
    assert len(table) == 6
    assert all(v == pytest.approx(math.acos(1.0 / 3.0)) for v in table.values())
    flipped = mesh_dihedrals(TET, [f[::-1] for f in TET_FACES])
    assert all(v == pytest.approx(2 * math.pi - math.acos(1.0 / 3.0)) for v in flipped.values())


def test_degenerate_star():
    edges = [[1, 0, 0], [2, 0, 0], [0, 1, 0], [0, 0, 1]]
    with pytest.raises(DegenerateStar):
        solid_angle([1.0, 1.0, 1.0, 1.0], edges)


def test_pair_lists():
    assert solid_angle_pairs(SubType.I_OEE, 6) == [(1, 4), (2, 5), (3, 6)]
    assert solid_angle_pairs(SubType.II_AEE, 6) == [(1, 4), (2, 6), (3, 5)]
    assert solid_angle_pairs(SubType.III_OAE, 8) == [(1, 3), (2, 5), (4, 7), (6, 8)]
    assert constant_solid_vertices(SubType.II_OEE, 8) == ["u", "w"]
    assert constant_solid_vertices(SubType.II_AEE, 8) == [1, 5]


@pytest.mark.parametrize("name", ["D-I#2", "D-II#2", "D-III#2", "D-IV#2", "D-V#2"])
def test_solid_angles_of_one_position(name):
    g = table_geometry(name)
    di = g.di if g.di is not None else enumerate_foldings(g)[0][0]
    emb = build(g, math.radians(80.0), di)
    sig, su, sw = vertex_solid_angles(emb, check=True)
    assert su + sw == pytest.approx(4 * math.pi, abs=1e-10)
    for k, j in solid_angle_pairs(g.subtype, g.N):
        assert sig[k - 1] + sig[j - 1] == pytest.approx(4 * math.pi, abs=1e-10)


def test_mean_curvature_scales_linearly():
    g = table_geometry("D-II#1")
    di = enumerate_foldings(g)[0][0]
    s1 = derivative_state(g, build(g, 1.0, di))
    g2 = g.scaled(2.0)
    s2 = derivative_state(g2, build(g2, 1.0, di))
    c1, c2 = total_mean_curvature(s1, g), total_mean_curvature(s2, g2)
    assert c2 == pytest.approx(2.0 * c1, rel=1e-12)
    assert oriented_volume(s1.embedding) == pytest.approx(0.0, abs=1e-10)


def test_flat_position_dihedrals():
    g = table_geometry("D-V#1")
    emb = construct(g, 0.0, g.di)
    # a doubly covered flat surface: every dihedral is 0, pi or 2pi
    for x in np.concatenate(embedding_dihedrals(emb)):
        assert min(abs(x), abs(x - math.pi), abs(x - 2 * math.pi)) < 1e-6


def test_relations_detect_wrong_subtype():
    g = table_geometry("D-II#1")
    di = enumerate_foldings(g)[0][0]
    s = derivative_state(g, build(g, 1.0, di))
    s.raw = (s.delta, s.eps, s.Delta)
    assert dihedral_relations(s, SubType.II_AEE).residual < 1e-10
    assert dihedral_relations(s, SubType.I_OEE).residual > 1e-3


@pytest.mark.parametrize("name", ["D-I#1", "D-III#1", "D-IV#1", "D-V#1"])
def test_battery_passes(name):
    g = table_geometry(name)
    di = g.di if g.di is not None else enumerate_foldings(g)[0][0]
    summary = validate_full(g, di, find_flexion_range(g, di), step=5.0)
    assert summary.passed, summary.failures()
    assert len(summary.reports) > 20
