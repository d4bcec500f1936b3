import numpy as np
import pytest

from conicrank import field_for_order
from conicrank.gf2mat import Gf2Matrix, colspace_contains, colspace_equal
from conicrank.incidence import (
    MATRIX_NAMES, LabeledMatrix, UnknownMatrix, build_A, build_B, build_B0, build_block, build_D,
    build_Dprime, build_matrix, conjectured_dims, dimension_report, tangent_spans, tangent_vectors,
)
from conicrank.plane import LineClass, PointClass
from conftest import geometry
from oracles import PlaneOracle, naive_rank2

DIM_Q = [3, 5, 7, 9, 11, 13, 17, 19, 23, 25, 27]


@pytest.mark.parametrize("q", [3, 5, 7, 9])
def test_B_matches_definition(q):
    F = field_for_order(q)
    oracle = PlaneOracle(F.add_table, F.mul_table)
    g = geometry(q)
    m2 = F.neg_table[F.from_int(2)]
    pts = oracle.points
    expect = np.zeros((len(g.E), len(g.I)), dtype=np.uint8)
    for r, e in enumerate(g.E):
        for c, p in enumerate(g.I):
            x, y, z = pts[p]
            expect[r, c] = oracle.dot(pts[e], (z, F.mul_table[m2, y], x)) == 0
    lm = build_B(g)
    np.testing.assert_array_equal(lm.matrix.to_dense(), expect)
    assert lm.matrix.rank2() == naive_rank2(expect)


@pytest.mark.parametrize("q", DIM_Q)
def test_dimensions_match_closed_forms(q):
    rep = dimension_report(geometry(q))
    assert rep.match
    assert (rep.dim_L, rep.dim_L0) == conjectured_dims(q)
    assert rep.rank_D == (q if q % 4 == 1 else q - 1)


@pytest.mark.parametrize("q,dims", [(3, (0, 3)), (5, (1, 6)), (7, (6, 13)), (9, (11, 20)),
                                    (11, (20, 31)), (13, (29, 42))])
def test_dimension_examples(q, dims):
    rep = dimension_report(geometry(q), with_d=False)
    assert (rep.dim_L, rep.dim_L0) == dims
    assert rep.rank_D == rep.rank_Dprime == -1
    assert set(rep.to_dict()) == {"q", "rank_B", "dim_L", "dim_L0", "rank_D", "rank_Dprime",
                                  "congruence_class", "conjecture_dim_L", "conjecture_dim_L0", "match"}


@pytest.mark.parametrize("q", [3, 5, 7])
def test_full_incidence_rank(q):
    A = build_A(geometry(q))
    dense = A.matrix.to_dense()
    assert (dense.sum(axis=0) == q + 1).all() and (dense.sum(axis=1) == q + 1).all()
    assert A.matrix.rank2() == naive_rank2(dense) == q * q + q


@pytest.mark.parametrize("q", [5, 7, 9, 11, 13])
def test_B_weights_and_transpose(q):
    g = geometry(q)
    B, B0 = build_B(g), build_B0(g)
    assert B.shape == (q * (q + 1) // 2, q * (q - 1) // 2)
    assert (B.matrix.col_weights() == (q + 1) // 2).all()
    assert (B.matrix.row_weights() == (q - 1) // 2).all()
    assert B0.matrix == B.matrix.T and B0.row_kind == "point"
    assert B.matrix.rank2() == B0.matrix.rank2()


# expected (row sum, column sum) per block at every q: rows absolute/internal/external,
# columns tangent/secant/passant
def _block_sums(q):
    h, k = (q - 1) // 2, (q + 1) // 2
    return {
        "A11": (1, 1), "A12": (q, 2), "A13": (0, 0),
        "A21": (0, 0), "A22": (k, h), "A23": (k, k),
        "A31": (2, q), "A32": (h, h), "A33": (h, k),
    }


@pytest.mark.parametrize("q", [5, 7, 9, 11])
def test_block_sums(q):
    g = geometry(q)
    for name, (rs, cs) in _block_sums(q).items():
        m = build_matrix(g, name).matrix
        assert (m.row_weights() == rs).all(), name
        assert (m.col_weights() == cs).all(), name


def test_block_examples_q5():
    g = geometry(5)
    a11 = build_block(g, PointClass.ABSOLUTE, LineClass.TANGENT)
    assert a11.shape == (6, 6)
    d = a11.matrix.to_dense()
    assert (d.sum(axis=0) == 1).all() and (d.sum(axis=1) == 1).all()
    assert not build_block(g, PointClass.INTERNAL, LineClass.TANGENT).matrix.to_dense().any()
    a31 = build_matrix(g, "A31")
    assert a31.shape == (15, 6) and (a31.matrix.row_weights() == 2).all()


@pytest.mark.parametrize("q", [5, 7, 9, 11, 13])
def test_D_and_Dprime(q):
    g = geometry(q)
    D, Dp = build_D(g).matrix, build_Dprime(g).matrix
    assert (D.col_weights() == (q + 1) ** 2 // 4).all()
    assert (Dp.col_weights() == (q * q - 1) // 4).all()
    # every (e, p) pair is joined by exactly one line, which is passant or secant
    assert (D.to_dense() + Dp.to_dense() == 1).all()
    B = build_B(g).matrix
    assert colspace_contains(B, D)
    ones = np.ones(len(g.E), dtype=np.uint8)
    if q % 4 == 3:
        assert Dp.rank2() == D.rank2() + 1 and Dp.in_colspace(ones) and not D.in_colspace(ones)


@pytest.mark.parametrize("q", [5, 7, 9, 11, 13])
def test_tangent_spans(q):
    g = geometry(q)
    chi = tangent_vectors(g)
    assert not (chi.sum(axis=0) % 2).any()
    spans = tangent_spans(g)
    assert (spans.dim_M1, spans.dim_M2) == (q, q - 1)
    ones = np.ones(len(g.E), dtype=np.uint8)
    assert not spans.M1.in_colspace(ones) and not spans.M2.in_colspace(ones)
    D = build_D(g).matrix
    assert colspace_equal(D, spans.M1 if q % 4 == 1 else spans.M2)


def test_labels_are_canonical_indices():
    g = geometry(7)
    B = build_B(g)
    np.testing.assert_array_equal(B.row_labels, g.E)
    np.testing.assert_array_equal(B.col_labels, g.I)
    with pytest.raises(ValueError):
        LabeledMatrix("x", Gf2Matrix.zeros(2, 2), np.array([1, 0]), np.array([0, 1]), "point", "line")
    with pytest.raises(ValueError):
        LabeledMatrix("x", Gf2Matrix.zeros(2, 2), np.array([0]), np.array([0, 1]), "point", "line")


def test_every_name_builds_and_unknown_fails():
    g = geometry(5)
    for name in MATRIX_NAMES:
        assert build_matrix(g, name).name == name
    with pytest.raises(UnknownMatrix):
        build_matrix(g, "C")


def test_modulus_independence():
    for q, mod in [(9, (2, 2, 1)), (25, (2, 1, 1)), (27, (1, 2, 0, 1))]:
        from conicrank import build_geometry
        rep = dimension_report(build_geometry(field_for_order(q, mod)), with_d=False)
        assert rep.match, (q, mod)
