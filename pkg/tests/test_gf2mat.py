import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conicrank import gf2mat
from conicrank.gf2mat import (
    DimensionMismatch, Gf2Matrix, colspace_contains, colspace_equal, kernels, pack_rows, unpack_rows,
)
from oracles import naive_rank2

BACKENDS = ["numpy"] + (["cython"] if gf2mat.BACKEND == "cython" else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    monkeypatch.setattr(gf2mat, "_kernels", kernels(request.param))
    return request.param


def bit_matrices(max_rows=70, max_cols=140):
    shapes = st.tuples(st.integers(0, max_rows), st.integers(1, max_cols))
    return shapes.flatmap(lambda s: arrays(np.uint8, s, elements=st.integers(0, 1)))


def test_random_ranks_match_oracle(backend):
    rng = np.random.default_rng(20240601)
    for _ in range(100):
        r, c = rng.integers(1, 65, size=2)
        density = rng.uniform(0.05, 0.6)
        dense = (rng.random((r, c)) < density).astype(np.uint8)
        assert Gf2Matrix.from_dense(dense).rank2() == naive_rank2(dense)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(bit_matrices())
def test_rank_property(backend, dense):
    m = Gf2Matrix.from_dense(dense)
    r = m.rank2()
    assert r == naive_rank2(dense)
    assert r == m.T.rank2()
    assert m.nullspace_dim() == dense.shape[1] - r


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(bit_matrices(40, 90))
def test_nullspace_basis_is_a_basis(backend, dense):
    m = Gf2Matrix.from_dense(dense)
    basis = m.nullspace_basis()
    assert len(basis) == m.nullspace_dim()
    for v in basis:
        assert not m.matvec(v).any()
    if basis:
        assert naive_rank2(np.array(basis)) == len(basis)


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(bit_matrices(60, 30), st.data())
def test_colspace_membership(backend, dense, data):
    m = Gf2Matrix.from_dense(dense)
    coeffs = np.array(data.draw(st.lists(st.integers(0, 1), min_size=m.cols, max_size=m.cols)), dtype=np.uint8)
    combo = (dense.astype(np.int64) @ coeffs % 2).astype(np.uint8)
    assert m.in_colspace(combo)
    probe = np.array(data.draw(st.lists(st.integers(0, 1), min_size=m.rows, max_size=m.rows)), dtype=np.uint8)
    expect = naive_rank2(np.hstack([dense, probe[:, None]])) == naive_rank2(dense)
    assert m.in_colspace(probe) == expect


def test_pack_roundtrip_across_word_boundaries():
    rng = np.random.default_rng(3)
    for cols in (1, 63, 64, 65, 128, 130):
        dense = rng.integers(0, 2, size=(7, cols), dtype=np.uint8)
        np.testing.assert_array_equal(unpack_rows(pack_rows(dense), cols), dense)
        m = Gf2Matrix.from_dense(dense)
        np.testing.assert_array_equal(m.column(cols - 1), dense[:, -1])
        np.testing.assert_array_equal(m.T.to_dense(), dense.T)


def test_basic_constructors_and_weights():
    eye = Gf2Matrix.identity(70)
    assert eye.rank2() == 70 and eye.nullspace_dim() == 0
    assert Gf2Matrix.zeros(5, 9).rank2() == 0
    m = Gf2Matrix.from_columns(4, [[0, 1], [], [3]])
    np.testing.assert_array_equal(m.col_weights(), [2, 0, 1])
    np.testing.assert_array_equal(m.row_weights(), [1, 1, 0, 1])
    assert m.hstack(m).shape == (4, 6)
    assert m == Gf2Matrix.from_dense(m.to_dense()) and hash(m) == hash(Gf2Matrix.from_dense(m.to_dense()))


def test_colspace_relations(backend):
    a = Gf2Matrix.from_dense(np.array([[1, 0], [0, 1], [1, 1]], dtype=np.uint8))
    b = Gf2Matrix.from_dense(np.array([[1], [1], [0]], dtype=np.uint8))
    assert colspace_contains(a, b) and not colspace_contains(b, a)
    assert colspace_equal(a, a.hstack(b))
    assert a.colspace_dim_union([[0, 0, 1]]) == 3


def test_errors():
    with pytest.raises(DimensionMismatch):
        Gf2Matrix(2, 3, np.zeros((3, 1), dtype=np.uint64))
    with pytest.raises(ValueError):
        Gf2Matrix(1, 3, np.array([[8]], dtype=np.uint64))
    with pytest.raises(DimensionMismatch):
        Gf2Matrix.zeros(2, 2).hstack(Gf2Matrix.zeros(3, 2))
    with pytest.raises(ValueError):
        kernels("fortran")


def test_immutable():
    m = Gf2Matrix.identity(3)
    with pytest.raises(ValueError):
        m.data[0, 0] = 0


def test_env_var_forces_fallback():
    out = subprocess.run(
        [sys.executable, "-c", "from conicrank import gf2mat; print(gf2mat.BACKEND)"],
        env={**os.environ, "CONICRANK_PURE": "1"}, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"


@pytest.mark.skipif(gf2mat.BACKEND != "cython", reason="compiled core not built")
def test_backends_agree_on_large_matrix():
    rng = np.random.default_rng(11)
    dense = (rng.random((300, 450)) < 0.05).astype(np.uint8)
    results = []
    for name in ("numpy", "cython"):
        work = pack_rows(dense)
        piv = kernels(name).echelonize(work, 450, True)
        results.append((np.asarray(piv).tolist(), work[: len(piv)].copy()))
    assert results[0][0] == results[1][0]
    np.testing.assert_array_equal(results[0][1], results[1][1])
