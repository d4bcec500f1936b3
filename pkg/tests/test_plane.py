import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conicrank import field_for_order
from conicrank.gf import FieldMismatch
from conicrank.plane import (
    DegenerateCoordinates, LineClass, PointClass, PointOnConic, build_geometry, classify_line,
    classify_point, coords_table, flip_incidence, incident, make_line, make_point, num_points, polar,
)
from conftest import geometry
from oracles import PlaneOracle

ALL_Q = [3, 5, 7, 9, 11, 13, 17, 19, 23, 25, 27]


@pytest.mark.parametrize("q", [3, 5, 7, 9])
def test_geometry_matches_brute_force_oracle(q):
    F = field_for_order(q)
    g = geometry(q)
    oracle = PlaneOracle(F.add_table, F.mul_table)
    assert [tuple(c) for c in g.coords.tolist()] == oracle.points
    inc = oracle.incidence()
    for j, pts in enumerate(g.line_points):
        np.testing.assert_array_equal(pts, np.flatnonzero(inc[:, j]))
    tangents_through, conic_on = oracle.classes()
    # class values equal the tangent count (points) and conic-point count (lines)
    np.testing.assert_array_equal(g.point_class, tangents_through)
    np.testing.assert_array_equal(g.line_class, conic_on)


@pytest.mark.parametrize("q", ALL_Q)
def test_class_sizes(q):
    g = geometry(q)
    assert g.n == num_points(q) == q * q + q + 1
    assert len(g.conic) == len(g.Abs) == len(g.T) == q + 1
    assert len(g.E) == len(g.Se) == q * (q + 1) // 2
    assert len(g.I) == len(g.Pa) == q * (q - 1) // 2


def test_small_examples():
    g3, g5, g9 = geometry(3), geometry(5), geometry(9)
    assert (g3.n, len(g3.conic), len(g3.E), len(g3.I)) == (13, 4, 6, 3)
    assert (g5.n, len(g5.conic), len(g5.E), len(g5.I)) == (31, 6, 15, 10)
    assert (len(g9.Pa), len(g9.Se), len(g9.T)) == (36, 45, 10)


@pytest.mark.parametrize("q", ALL_Q)
def test_incidence_is_a_projective_plane(q):
    g = geometry(q)
    assert all(len(pts) == q + 1 for pts in g.line_points)
    assert all(len(ls) == q + 1 for ls in g.point_lines)
    # any two distinct points share exactly one line
    rng = np.random.default_rng(q)
    a, b = rng.integers(0, g.n, size=(2, 300))
    keep = a != b
    for x, y in zip(a[keep], b[keep]):
        common = np.intersect1d(g.point_lines[x], g.point_lines[y])
        assert len(common) == 1 and common[0] == g.join(int(x), int(y))


@pytest.mark.parametrize("q", ALL_Q)
def test_polarity(q):
    g = geometry(q)
    idx = np.arange(g.n)
    np.testing.assert_array_equal(g.polar_of_line[g.polar_of_point], idx)
    # incidence reversing: p on l iff polar(l) on polar(p)
    for l in range(0, g.n, max(1, g.n // 40)):
        for p in g.line_points[l]:
            assert g.polar_of_line[l] in g.line_points[g.polar_of_point[p]]
    # conic points map to their tangents, internal to passants, external to secants
    np.testing.assert_array_equal(g.line_class[g.polar_of_point[g.conic]], LineClass.TANGENT)
    np.testing.assert_array_equal(g.line_class[g.polar_of_point[g.I]], LineClass.PASSANT)
    np.testing.assert_array_equal(g.line_class[g.polar_of_point[g.E]], LineClass.SECANT)


def test_polar_formula_and_examples():
    F = field_for_order(5)
    xi = F.xi
    for x, y, z in [(1, 2, 3), (0, 1, 4), (0, 0, 1), (1, 0, 0)]:
        expect = make_line(F, [z, -2 * F(y), x])
        assert polar(make_point(F, [x, y, z])) == expect
    p = make_point(F, [1, 0, -xi])
    assert polar(p) == make_line(F, [1, 0, -(xi.inverse())])
    for pt in geometry(5).points:
        assert polar(polar(pt)) == pt


def test_incident_examples():
    F = field_for_order(5)
    assert incident(make_point(F, [0, 0, 1]), make_line(F, [1, 0, 0]))
    assert not incident(make_point(F, [1, 1, 1]), make_line(F, [1, 1, 1]))


@given(st.sampled_from([5, 7, 9, 25]), st.data())
def test_tangent_at_conic_point(q, data):
    F = field_for_order(q)
    t = F.element(data.draw(st.integers(0, q - 1)))
    p = make_point(F, [1, t, t * t])
    l = make_line(F, [t * t, -2 * t, 1])
    assert incident(p, l)
    assert classify_point(p) == PointClass.ABSOLUTE and classify_line(l) == LineClass.TANGENT
    assert polar(p) == l


@pytest.mark.parametrize("q", [5, 7, 9, 11, 13])
def test_classify_examples(q):
    F = field_for_order(q)
    xi = F.xi
    assert classify_point(make_point(F, [0, 0, 1])) == PointClass.ABSOLUTE
    assert classify_point(make_point(F, [1, 0, -xi])) == PointClass.INTERNAL
    assert classify_point(make_point(F, [0, 1, 0])) == PointClass.EXTERNAL
    assert classify_line(make_line(F, [1, 0, 0])) == LineClass.TANGENT
    assert classify_line(make_line(F, [0, 1, 0])) == LineClass.SECANT
    if q % 4 == 1:
        assert classify_line(make_line(F, [1, 0, xi.inverse()])) == LineClass.PASSANT


def test_make_point_errors():
    F = field_for_order(7)
    with pytest.raises(DegenerateCoordinates):
        make_point(F, [0, 0, 0])
    with pytest.raises(FieldMismatch):
        incident(make_point(F, [0, 0, 1]), make_line(field_for_order(5), [1, 0, 0]))


@pytest.mark.parametrize("q", [5, 7])
def test_neighbourhood_examples(q):
    g = geometry(q)
    p = int(g.I[0])
    assert len(g.Pa_through(p)) == len(g.Se_through(p)) == (q + 1) // 2
    assert len(g.T_through(p)) == 0
    assert len(g.N_PaE(p)) == (q + 1) ** 2 // 4
    assert len(g.N_SeE(p)) == (q * q - 1) // 4
    nb = g.neighborhoods(p)
    np.testing.assert_array_equal(nb["N_PaE"], g.N_PaE(p))
    with pytest.raises(PointOnConic):
        g.Pa_through(int(g.conic[0]))
    with pytest.raises(PointOnConic):
        g.Se_through(int(g.conic[0]))
    secant = int(g.Se[0])
    assert len(g.E_on(secant)) == len(g.I_on(secant)) == (q - 1) // 2
    assert len(g.points_on(secant, PointClass.ABSOLUTE)) == 2


def test_join_broadcasts():
    g = geometry(7)
    a = np.arange(10)
    b = np.arange(10, 20)
    lines = g.join(a, b)
    for x, y, l in zip(a, b, lines):
        assert x in g.line_points[l] and y in g.line_points[l]
    assert g.meet(int(lines[0]), int(lines[1])) in g.line_points[lines[0]]


def test_geometry_is_immutable_and_flip_copies():
    g = geometry(5)
    with pytest.raises(dataclasses.FrozenInstanceError):
        g.field = None
    with pytest.raises(ValueError):
        g.line_points[0][0] = 3
    bad = flip_incidence(g, 0, 0)
    assert (0 in bad.line_points[0]) != (0 in g.line_points[0])
    assert 0 in geometry(5).line_points[int(geometry(5).point_lines[0][0])]


def test_index_of_and_chi():
    g = geometry(9)
    for i in (0, 17, 81, 90):
        assert g.index_of(g.coords[i]) == i
    chi = g.chi(g.E[:3])
    assert chi.sum() == 3 and chi.shape == (len(g.E),)


def test_coords_table_order():
    F = field_for_order(3)
    c = coords_table(F)
    assert c[0].tolist() == [1, 0, 0] and c[9].tolist() == [0, 1, 0] and c[12].tolist() == [0, 0, 1]


def test_modulus_choice_does_not_change_counts():
    g1 = build_geometry(field_for_order(9))
    g2 = build_geometry(field_for_order(9, (2, 2, 1)))
    for attr in ("E", "I", "Pa", "Se", "T"):
        assert len(getattr(g1, attr)) == len(getattr(g2, attr))


@pytest.mark.parametrize("q", [7, 9, 25, 27])
def test_single_object_polar_matches_geometry_table(q):
    g = geometry(q)
    for i in range(g.n):
        assert polar(g.point(i)).index == g.polar_of_point[i]
        assert polar(g.line(i)).index == g.polar_of_line[i]
        assert classify_point(g.point(i)) == g.point_class[i]
