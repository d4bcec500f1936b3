import json

import numpy as np
import pytest

from conicrank import field_for_order
from conicrank.group import BoundExceeded
from conicrank.incidence import build_D
from conicrank.plane import PointClass, flip_incidence
from conicrank.verify import (
    CHECKS, LemmaVerdict, applicable_checks, mprime_parameter, passant_counts, run_suite,
    sksum_residual, verdicts_json, witness_M, witness_Mprime,
)
from conftest import geometry


def _failed(verdicts):
    return {v.lemma_id: v for v in verdicts if not v.passed}


@pytest.mark.parametrize("q", [3, 5, 7, 9, 11, 13, 17, 19, 23, 25, 27])
def test_geometry_suite_passes(q):
    verdicts = run_suite(q, geom=geometry(q))
    assert not _failed(verdicts)
    assert [v.lemma_id for v in verdicts] == applicable_checks(q)


@pytest.mark.parametrize("q", [5, 9, 13])
def test_group_suite_passes_for_q_1_mod_4(q):
    assert not _failed(run_suite(q, depth="group", geom=geometry(q)))


@pytest.mark.parametrize("q", [3, 7, 11])
def test_group_suite_for_q_3_mod_4_differs_only_in_zero_class_count(q):
    failed = _failed(run_suite(q, depth="group", geom=geometry(q)))
    assert set(failed) == {"Cor_y11"}
    detail = failed["Cor_y11"].detail
    assert f"observed |K∩[0]| in [{(q + 3) // 2}]" in detail
    assert f"stated {(q - 1) // 2}" in detail
    assert "|K∩D|" not in detail and "Pi" not in detail and "Theta" not in detail


def test_gating_by_congruence():
    ids7 = applicable_checks(7, "group")
    assert "Lemma_set1" not in ids7 and "Cor_tsum1" not in ids7 and "Lemma_m1" not in ids7
    assert "Lemma_deofD" in ids7 and "Lemma_m2" in ids7
    ids5 = applicable_checks(5, "group")
    assert "Lemma_set1" in ids5 and "Lemma_m2" not in ids5 and "Lemma_deofD" not in ids5
    assert all(ch.depth == "geometry" for ch in CHECKS if ch.lemma_id in applicable_checks(5))
    with pytest.raises(ValueError):
        applicable_checks(5, "deep")


def test_deterministic_json():
    a = verdicts_json(run_suite(7))
    b = verdicts_json(run_suite(7))
    assert a == b
    doc = json.loads(a)
    assert set(doc[0]) == {"lemma_id", "q", "passed", "detail", "note"}


def test_threads_give_same_verdicts():
    assert run_suite(9, depth="group", threads=4) == run_suite(9, depth="group", threads=1)


def test_only_and_bound():
    v = run_suite(5, only=["Rank_A", "Table1"])
    assert [x.lemma_id for x in v] == ["Table1", "Rank_A"]
    with pytest.raises(BoundExceeded):
        run_suite(17, depth="group")


@pytest.mark.parametrize("flip", [(0, 0), (3, 17), (30, 30), (12, 5)])
def test_corrupted_geometry_is_detected(flip):
    bad = flip_incidence(geometry(5), *flip)
    failed = _failed(run_suite(5, geom=bad))
    assert failed
    assert all(v.detail for v in failed.values())


def test_verdict_requires_detail_on_failure():
    with pytest.raises(ValueError):
        LemmaVerdict("x", 5, False)


@pytest.mark.parametrize("q", [5, 9, 13])
def test_witness_M(q):
    g = geometry(q)
    F = g.field
    base = g.index_of((0, 0, 1))
    m = witness_M(g, base)
    expect = sorted(g.index_of((F.one, -F.element(b), F.element(b) * F.element(b) - F.xi)) for b in range(q))
    assert m.tolist() == expect
    for c in g.conic:
        m = witness_M(g, int(c))
        assert len(m) == q and (g.point_class[m] == PointClass.INTERNAL).all()
        counts = passant_counts(g, m, g.E_on(g.polar_of_point[c]))
        assert (counts == (q + 1) // 2).all()


@pytest.mark.parametrize("q", [5, 7, 9, 11, 13])
def test_witness_Mprime(q):
    g = geometry(q)
    F = g.field
    x = mprime_parameter(F)
    assert F.square_class[F.sub(1, x)] == -1
    assert F.square_class[x] == (1 if q % 4 == 1 else -1)
    p = g.index_of((0, 1, 0))
    m = witness_Mprime(g, p)
    assert g.index_of((1, 1, x)) in m.tolist()
    for e in g.E:
        m = witness_Mprime(g, int(e))
        assert len(m) == q - 1
        at_p = passant_counts(g, m, np.array([e]))[0]
        assert at_p == (0 if q % 4 == 1 else q - 1)


@pytest.mark.parametrize("q", [5, 7, 9, 11])
def test_sksum_holds_for_every_tangent_choice(q):
    g = geometry(q)
    D = build_D(g).matrix.to_dense()
    for t in g.T:
        sums, sizes = sksum_residual(g, D, int(t))
        assert (sizes == (q + 1) // 2).all()
        np.testing.assert_array_equal(sums % 2, D)


def test_witness_errors():
    from conicrank.verify import VerificationFailed
    g = geometry(7)
    with pytest.raises(VerificationFailed):
        witness_M(g, int(g.conic[0]))
    with pytest.raises(VerificationFailed):
        witness_Mprime(g, int(g.I[0]))


@pytest.mark.slow
def test_geometry_suite_q81():
    v = run_suite(81)
    assert not _failed(v)
