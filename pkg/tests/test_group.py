from functools import lru_cache

import numpy as np
import pytest

from conicrank import field_for_order
from conicrank.group import (
    BoundExceeded, ConjClassLabel, NotUnimodular, act, act_line, classify_element, collineation,
    conjugacy_classes_bruteforce, enumerate_G, enumerate_H, expected_class_labels,
    generated_subgroup_size, generator_indices, group_bound, hpq_counts, hpq_members,
    hpq_parity_table, pi_values, tau, theta_values,
)
from conicrank.plane import incident
from conftest import geometry

SMALL_Q = [3, 5, 7, 9, 11, 13]


@lru_cache(maxsize=None)
def H_of(q):
    return enumerate_H(field_for_order(q), geometry(q))


def _inverse_closed_form(F, a, b, c, d, corner):
    m, n, s = F.mul, F.neg_table, F.add
    two = F.from_int(2)
    return np.array([
        [m(d, d), n[m(b, d)], m(b, b)],
        [n[m(two, m(c, d))], s(m(a, d), m(b, c)), n[m(two, m(a, b))]],
        [m(c, c), n[m(a, c)], corner],
    ], dtype=np.int64)


def _matmul(F, x, y):
    out = np.zeros((3, 3), dtype=np.int64)
    for i in range(3):
        for j in range(3):
            acc = 0
            for k in range(3):
                acc = F.add(acc, F.mul(x[i, k], y[k, j]))
            out[i, j] = acc
    return out


def test_tau_entries_and_identity():
    F = field_for_order(7)
    g = tau(2, 3, 1, 2, field=F)
    np.testing.assert_array_equal(g.matrix, [[4, 6, 2], [4, 0, 5], [1, 2, 4]])
    np.testing.assert_array_equal(tau(1, 0, 0, 1, field=F).matrix, np.eye(3, dtype=int))
    with pytest.raises(NotUnimodular):
        tau(1, 1, 1, 1, field=F)
    with pytest.raises(TypeError):
        tau(1, 0, 0, 1)


@pytest.mark.parametrize("q", [5, 7, 9])
def test_inverse_closed_form(q):
    F = field_for_order(q)
    eye = np.eye(3, dtype=np.int64)
    corner_c_squared_fails = False
    for a, b, c, d in H_of(q).quads:
        g = tau(a, b, c, d, field=F)
        good = _inverse_closed_form(F, a, b, c, d, F.mul(a, a))
        np.testing.assert_array_equal(_matmul(F, g.matrix, good), eye)
        np.testing.assert_array_equal(g.inverse().matrix, good)
        bad = _inverse_closed_form(F, a, b, c, d, F.mul(c, c))
        corner_c_squared_fails |= not np.array_equal(_matmul(F, g.matrix, bad), eye)
    # with c^2 in the bottom-right corner the formula is not an inverse in general
    assert corner_c_squared_fails


def test_tau_is_a_homomorphism_exhaustive_q3():
    F = field_for_order(3)
    els = H_of(3).elements
    for x in els:
        for y in els:
            np.testing.assert_array_equal(_matmul(F, x.matrix, y.matrix), (x @ y).matrix)


@pytest.mark.parametrize("q", [5, 7, 9, 11, 13])
def test_tau_is_a_homomorphism_random(q):
    F = field_for_order(q)
    quads = H_of(q).quads
    rng = np.random.default_rng(q)
    for i, j in rng.integers(0, len(quads), size=(50, 2)):
        x, y = tau(*quads[i], field=F), tau(*quads[j], field=F)
        np.testing.assert_array_equal(_matmul(F, x.matrix, y.matrix), (x @ y).matrix)


@pytest.mark.parametrize("q", SMALL_Q)
def test_orders(q):
    H = H_of(q)
    assert len(H) == q * (q * q - 1) // 2
    G = enumerate_G(H.field, geometry(q), H=H)
    assert len(G) == 2 * len(H)
    assert len({r.tobytes() for r in G.point_perm}) == len(G)


@pytest.mark.parametrize("q", SMALL_Q)
def test_action_fixes_conic_and_preserves_incidence(q):
    H, g = H_of(q), geometry(q)
    assert (np.sort(H.point_perm[:, g.conic], axis=1) == g.conic).all()
    rng = np.random.default_rng(q)
    for h in rng.integers(0, len(H), size=10):
        for l in rng.integers(0, g.n, size=10):
            img = H.line_perm[h, l]
            np.testing.assert_array_equal(np.sort(H.point_perm[h, g.line_points[l]]), g.line_points[img])


def test_single_object_action_q3():
    F, g, H = field_for_order(3), geometry(3), H_of(3)
    ident = tau(1, 0, 0, 1, field=F)
    for p in g.points:
        assert act(ident, p) == p
    for k, el in enumerate(H.elements):
        for p in g.points:
            assert act(el, p).index == H.point_perm[k, p.index]
            for l in g.lines:
                assert incident(p, l) == incident(act(el, p), act_line(el, l))


@pytest.mark.parametrize("q", SMALL_Q)
def test_transitivity(q):
    H, g = H_of(q), geometry(q)
    for pts in (g.E, g.I, g.conic):
        np.testing.assert_array_equal(H.orbit(int(pts[0])), pts)
    for lines in (g.Pa, g.Se, g.T):
        np.testing.assert_array_equal(H.line_orbit(int(lines[0])), lines)


def _conjugacy_oracle(H):
    # conjugate every element by every element, straight on the permutations
    P = H.point_perm
    inv = np.argsort(P, axis=1)
    index = {r.tobytes(): i for i, r in enumerate(P)}
    seen, classes = set(), []
    for h in range(len(H)):
        if h in seen:
            continue
        # g^-1 h g with right actions: apply inv[g], then h, then g
        cls = {index[P[g][P[h][inv[g]]].tobytes()] for g in range(len(H))}
        seen |= cls
        classes.append(frozenset(cls))
    return set(classes)


@pytest.mark.parametrize("q", [3, 5, 7])
def test_labels_match_full_conjugation_oracle(q):
    H = H_of(q)
    by_label = {frozenset(v.tolist()) for v in H.classes.values()}
    assert by_label == _conjugacy_oracle(H)


@pytest.mark.parametrize("q", SMALL_Q)
def test_labels_match_generator_conjugation(q):
    H = H_of(q)
    assert generated_subgroup_size(H, generator_indices(H)) == len(H)
    brute = {frozenset(c.tolist()) for c in conjugacy_classes_bruteforce(H)}
    assert brute == {frozenset(v.tolist()) for v in H.classes.values()}


@pytest.mark.parametrize("q", SMALL_Q)
def test_class_sizes(q):
    H = H_of(q)
    sizes = H.class_sizes()
    assert sizes["D"] == 1
    assert sizes["Fplus"] == sizes["Fminus"] == (q * q - 1) // 2
    assert sizes["Zero"] == (q * (q + 1) // 2 if q % 4 == 1 else q * (q - 1) // 2)
    n_theta = sum(k.startswith("Theta") for k in sizes)
    n_pi = sum(k.startswith("Pi") for k in sizes)
    if q % 4 == 1:
        assert (n_theta, n_pi) == ((q - 5) // 4, (q - 1) // 4)
    else:
        assert (n_theta, n_pi) == ((q - 3) // 4, (q - 3) // 4)
    assert all(v == q * (q + 1) for k, v in sizes.items() if k.startswith("Theta"))
    assert all(v == q * (q - 1) for k, v in sizes.items() if k.startswith("Pi"))
    assert sum(sizes.values()) == len(H)


def test_q5_and_q13_class_examples():
    assert H_of(5).class_sizes() == {"D": 1, "Fplus": 12, "Fminus": 12, "Zero": 15, "Pi1": 20}
    F = field_for_order(13)
    assert (len(theta_values(F)), len(pi_values(F))) == (2, 3)


def test_fplus_fminus_representatives():
    for q in (5, 7, 9):
        F = field_for_order(q)
        assert classify_element(tau(1, 1, 0, 1, field=F)).kind == "Fplus"
        assert classify_element(tau(1, F.xi_value, 0, 1, field=F)).kind == "Fminus"
        assert classify_element(tau(1, 0, 0, 1, field=F)) == ConjClassLabel("D", F.from_int(4))
    with pytest.raises(NotUnimodular):
        classify_element(collineation(field_for_order(5), (1, 0, 0, 2)))


@pytest.mark.parametrize("q", SMALL_Q)
def test_stabilizers(q):
    H, g = H_of(q), geometry(q)
    for pts in (g.I, g.E):
        K = H.stabilizer(int(pts[0]))
        assert len(K) * len(pts) == len(H)
        p = int(pts[0])
        perp = int(g.polar_of_point[p])
        assert (H.line_perm[K, perp] == perp).all()


@pytest.mark.parametrize("q", [3, 5, 7, 9, 11, 13])
def test_involutions_in_internal_stabilizer(q):
    # computed straight from the permutations: non-identity elements squaring to 1
    H, g = H_of(q), geometry(q)
    K = H.stabilizer(int(g.I[0]))
    P = H.point_perm[K]
    ident = np.arange(g.n)
    involutions = sum(1 for row in P if not (row == ident).all() and (row[row] == ident).all())
    # K is dihedral of order q + 1; a central involution exists iff (q + 1)/2 is even
    expect = (q + 1) // 2 if q % 4 == 1 else (q + 3) // 2
    assert involutions == expect
    zero = expected_class_labels(H.field)[3]
    assert sum(H.labels[k] == zero for k in K) == expect


def test_hpq_members_and_counts_agree():
    H, g = H_of(7), geometry(7)
    p = int(g.I[0])
    counts = hpq_counts(H, g, p)
    for x in g.E[:6]:
        members = hpq_members(H, g, p, int(x))
        assert counts[:, x].sum() == len(members)
        table = hpq_parity_table(H, g, p, int(x))
        names = [lab.name for lab in expected_class_labels(H.field)]
        assert all(table[n] == counts[k, x] % 2 for k, n in enumerate(names))
        assert table["[4]"] == (table["Fplus"] + table["Fminus"]) % 2


def test_bound(monkeypatch):
    with pytest.raises(BoundExceeded):
        enumerate_H(field_for_order(17))
    monkeypatch.setenv("CONIC_GROUP_BOUND", "5")
    assert group_bound() == 5 and group_bound(9) == 9
    with pytest.raises(BoundExceeded):
        enumerate_H(field_for_order(7))
