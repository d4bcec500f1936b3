"""The conic-preserving collineation groups H ~ PSL(2,q) and G ~ PGL(2,q).

Elements are images of 2x2 matrices under the symmetric-square map ``tau``.
Points are row vectors acted on from the right (``p -> p·M``); lines are
column vectors and move by the inverse matrix, so incidence is preserved.
Every enumerated group also stores its action on points and lines as
permutation arrays, which is what the audits consume.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .gf import Field, FieldElement, FieldMismatch
from .plane import ConicGeometry, ProjLine, ProjPoint, normalize_index

DEFAULT_GROUP_BOUND = 13


class NotUnimodular(ValueError):
    pass


class BoundExceeded(RuntimeError):
    pass


def group_bound(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    return int(os.environ.get("CONIC_GROUP_BOUND", DEFAULT_GROUP_BOUND))


def _check_bound(q: int, bound: int | None) -> None:
    b = group_bound(bound)
    if q > b:
        raise BoundExceeded(f"q={q} exceeds the group enumeration bound {b}")


# -- tau ---------------------------------------------------------------------

def tau_arrays(field: Field, quads: np.ndarray) -> np.ndarray:
    """Vectorised tau: (n, 4) quadruples (a, b, c, d) -> (n, 3, 3) matrices.

    Works for any 2x2 matrix; the image is invertible iff ad - bc != 0.
    """
    mul, add = field.mul_table, field.add_table
    a, b, c, d = (quads[:, k] for k in range(4))
    two = field.from_int(2)
    out = np.empty((len(quads), 3, 3), dtype=np.int64)
    out[:, 0, 0] = mul[a, a]
    out[:, 0, 1] = mul[a, b]
    out[:, 0, 2] = mul[b, b]
    out[:, 1, 0] = mul[two, mul[a, c]]
    out[:, 1, 1] = add[mul[a, d], mul[b, c]]
    out[:, 1, 2] = mul[two, mul[b, d]]
    out[:, 2, 0] = mul[c, c]
    out[:, 2, 1] = mul[c, d]
    out[:, 2, 2] = mul[d, d]
    return out


def adjugate_quads(field: Field, quads: np.ndarray) -> np.ndarray:
    """(a, b, c, d) -> (d, -b, -c, a); tau of this inverts tau(a,b,c,d) up to a scalar."""
    neg = field.neg_table
    return np.stack([quads[:, 3], neg[quads[:, 1]], neg[quads[:, 2]], quads[:, 0]], axis=1)


def _det(field: Field, q4) -> int:
    a, b, c, d = (int(x) for x in q4)
    return int(field.sub(field.mul_table[a, d], field.mul_table[b, c]))


def matmul(field: Field, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Product of (.., n, m) and (.., m, k) matrices over F_q."""
    mul, add = field.mul_table, field.add_table
    out = np.zeros(x.shape[:-1] + y.shape[-1:], dtype=np.int64)
    for j in range(x.shape[-1]):
        out = add[out, mul[x[..., :, j, None], y[..., None, j, :]]]
    return out


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A tau-image. ``source`` is one 2x2 preimage (a, b, c, d); equality is by matrix."""

    field: Field
    mat: tuple[int, ...]
    source: tuple[int, int, int, int]

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.mat, dtype=np.int64).reshape(3, 3)

    @property
    def det2(self) -> int:
        """Determinant of the 2x2 source (1 for elements of H)."""
        return _det(self.field, self.source)

    def inverse(self) -> GroupElement:
        adj = adjugate_quads(self.field, np.array([self.source]))[0]
        return _element(self.field, adj)

    def __matmul__(self, other: GroupElement) -> GroupElement:
        if other.field != self.field:
            raise FieldMismatch("group elements over different fields")
        a, b, c, d = self.source
        e, f, g, h = other.source
        F = self.field
        prod = (F.add(F.mul(a, e), F.mul(b, g)), F.add(F.mul(a, f), F.mul(b, h)),
                F.add(F.mul(c, e), F.mul(d, g)), F.add(F.mul(c, f), F.mul(d, h)))
        return _element(F, np.array(prod, dtype=np.int64))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GroupElement) and self.field == other.field and self.mat == other.mat

    def __hash__(self) -> int:
        return hash(self.mat)

    def __repr__(self) -> str:
        return f"tau{self.source}"


def _element(field: Field, quad: np.ndarray) -> GroupElement:
    mat = tau_arrays(field, np.asarray(quad, dtype=np.int64).reshape(1, 4))[0]
    return GroupElement(field, tuple(int(v) for v in mat.ravel()), tuple(int(v) for v in quad))


def _as_index(field: Field | None, x) -> tuple[Field | None, int]:
    if isinstance(x, FieldElement):
        if field is not None and x.field != field:
            raise FieldMismatch("mixed fields in tau arguments")
        return x.field, x.value
    return field, int(x)


def tau(a, b, c, d, field: Field | None = None) -> GroupElement:
    """tau of a unimodular 2x2 matrix.

    Arguments are FieldElements, or integer element indices when ``field`` is
    given. Raises :class:`NotUnimodular` unless ad - bc = 1.
    """
    vals = []
    for x in (a, b, c, d):
        field, v = _as_index(field, x)
        vals.append(v)
    if field is None:
        raise TypeError("pass FieldElements or a field")
    if _det(field, vals) != 1:
        raise NotUnimodular(f"ad - bc != 1 for {tuple(vals)}")
    return _element(field, np.array(vals, dtype=np.int64))


def collineation(field: Field, quad) -> GroupElement:
    """tau of any invertible 2x2 matrix (an element of G up to scalars)."""
    quad = np.asarray(quad, dtype=np.int64)
    if _det(field, quad) == 0:
        raise NotUnimodular("singular 2x2 matrix")
    return _element(field, quad)


# -- action -------------------------------------------------------------------

def act_coords(field: Field, mats: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Canonical indices of ``coords @ M`` for every matrix: shape (n_mats, n_points)."""
    mul, add = field.mul_table, field.add_table
    cols = []
    for k in range(3):
        acc = np.zeros((len(mats), len(coords)), dtype=np.int64)
        for j in range(3):
            acc = add[acc, mul[mats[:, j, k][:, None], coords[None, :, j]]]
        cols.append(acc)
    return normalize_index(field, *cols)


def act_line_coords(field: Field, inv_mats: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Canonical indices of ``Minv @ b`` for each line column vector b."""
    return act_coords(field, np.transpose(inv_mats, (0, 2, 1)), coords)


def act(g: GroupElement, p: ProjPoint) -> ProjPoint:
    if g.field != p.field:
        raise FieldMismatch("element and point over different fields")
    from .plane import _from_index
    idx = act_coords(g.field, g.matrix[None], p.ints()[None])[0, 0]
    return _from_index(g.field, int(idx), ProjPoint)


def act_line(g: GroupElement, l: ProjLine) -> ProjLine:
    if g.field != l.field:
        raise FieldMismatch("element and line over different fields")
    from .plane import _from_index
    inv = g.inverse().matrix
    idx = act_line_coords(g.field, inv[None], l.ints()[None])[0, 0]
    return _from_index(g.field, int(idx), ProjLine)


# -- conjugacy class labels ----------------------------------------------------

_KIND_ORDER = {"D": 0, "Fplus": 1, "Fminus": 2, "Zero": 3, "Theta": 4, "Pi": 5}


@dataclass(frozen=True, order=False)
class ConjClassLabel:
    """Class of an element of H, read from T = trace + 1 (Theta/Pi numbered from 1)."""

    kind: str
    T_value: int
    index: int = 0

    @property
    def name(self) -> str:
        if self.kind in ("Theta", "Pi"):
            return f"{self.kind}{self.index}"
        return self.kind

    @property
    def in_four(self) -> bool:
        """Member of the union class [4] = F+ u F-."""
        return self.kind in ("Fplus", "Fminus")

    def sort_key(self) -> tuple[int, int]:
        return (_KIND_ORDER[self.kind], self.index)

    def __str__(self) -> str:
        return self.name


def theta_values(field: Field) -> list[int]:
    """T values of the Theta classes in field order: squares s != 4 with s - 4 square."""
    four = field.from_int(4)
    sq = field.square_class
    return [s for s in range(1, field.q) if sq[s] == 1 and s != four and sq[field.sub(s, four)] == 1]


def pi_values(field: Field) -> list[int]:
    four = field.from_int(4)
    sq = field.square_class
    return [s for s in range(1, field.q) if sq[s] == 1 and s != four and sq[field.sub(s, four)] == -1]


def _label_quad(field: Field, quad, thetas: list[int], pis: list[int]) -> ConjClassLabel:
    a, b, c, d = (int(x) for x in quad)
    s = int(field.add(a, d))
    T = int(field.mul(s, s))
    four = field.from_int(4)
    if T == four:
        if s != field.from_int(2):
            neg = field.neg_table
            a, b, c, d = (int(neg[x]) for x in (a, b, c, d))
        if a == 1 and b == 0 and c == 0 and d == 1:
            return ConjClassLabel("D", T)
        # unipotent: I + N with N nilpotent; the square class of its
        # upper-right entry (or of minus the lower-left one) is a conjugacy invariant
        key = b if b != 0 else int(field.neg_table[c])
        return ConjClassLabel("Fplus" if field.square_class[key] == 1 else "Fminus", T)
    if T == 0:
        return ConjClassLabel("Zero", 0)
    if T in thetas:
        return ConjClassLabel("Theta", T, thetas.index(T) + 1)
    return ConjClassLabel("Pi", T, pis.index(T) + 1)


def classify_element(g: GroupElement) -> ConjClassLabel:
    if g.det2 != 1:
        raise NotUnimodular("only elements of H carry these class labels")
    return _label_quad(g.field, g.source, theta_values(g.field), pi_values(g.field))


def expected_class_labels(field: Field) -> list[ConjClassLabel]:
    """All class labels of H in report order."""
    four = field.from_int(4)
    out = [ConjClassLabel("D", four), ConjClassLabel("Fplus", four), ConjClassLabel("Fminus", four),
           ConjClassLabel("Zero", 0)]
    out += [ConjClassLabel("Theta", t, i + 1) for i, t in enumerate(theta_values(field))]
    out += [ConjClassLabel("Pi", t, i + 1) for i, t in enumerate(pi_values(field))]
    return out


# -- enumerated groups ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PermGroup:
    """A finite collineation group with its permutation actions on points and lines.

    ``point_perm[g, i]`` is the image of point ``i`` under element ``g``;
    elements act on the right, so ``g`` then ``h`` is ``point_perm[h][point_perm[g]]``.
    """

    field: Field
    quads: np.ndarray
    mats: np.ndarray
    point_perm: np.ndarray
    line_perm: np.ndarray

    def __len__(self) -> int:
        return len(self.quads)

    @cached_property
    def elements(self) -> tuple[GroupElement, ...]:
        return tuple(GroupElement(self.field, tuple(int(v) for v in m.ravel()), tuple(int(v) for v in s))
                     for m, s in zip(self.mats, self.quads))

    @cached_property
    def _perm_index(self) -> dict[bytes, int]:
        return {row.tobytes(): i for i, row in enumerate(self.point_perm)}

    def index_of_perm(self, perm: np.ndarray) -> int:
        return self._perm_index[np.ascontiguousarray(perm, dtype=self.point_perm.dtype).tobytes()]

    @cached_property
    def identity_index(self) -> int:
        return self.index_of_perm(np.arange(self.point_perm.shape[1]))

    def compose(self, g: int, h: int) -> int:
        """Index of ``g`` followed by ``h``."""
        return self.index_of_perm(self.point_perm[h][self.point_perm[g]])

    @cached_property
    def inverses(self) -> np.ndarray:
        inv = np.empty_like(self.point_perm)
        rows = np.arange(len(self))[:, None]
        inv[rows, self.point_perm] = np.arange(self.point_perm.shape[1])[None, :]
        return np.array([self._perm_index[r.tobytes()] for r in inv], dtype=np.int64)

    def conjugate_all(self, s: int) -> np.ndarray:
        """Index of s^-1 · h · s for every h (s applied last)."""
        sinv = self.inverses[s]
        p = self.point_perm
        conj = p[s][p[:, p[sinv]]]
        return np.array([self._perm_index[r.tobytes()] for r in conj], dtype=np.int64)

    def stabilizer(self, point: int) -> np.ndarray:
        return np.flatnonzero(self.point_perm[:, point] == point)

    def line_stabilizer(self, line: int) -> np.ndarray:
        return np.flatnonzero(self.line_perm[:, line] == line)

    def orbit(self, point: int, among: np.ndarray | None = None) -> np.ndarray:
        """Orbit of a point under the whole group or under the subset ``among``."""
        rows = self.point_perm if among is None else self.point_perm[among]
        return np.unique(rows[:, point])

    def line_orbit(self, line: int, among: np.ndarray | None = None) -> np.ndarray:
        rows = self.line_perm if among is None else self.line_perm[among]
        return np.unique(rows[:, line])


def _build_perm_group(field: Field, quads: np.ndarray, coords: np.ndarray) -> tuple:
    mats = tau_arrays(field, quads)
    inv = tau_arrays(field, adjugate_quads(field, quads))
    pp = act_coords(field, mats, coords)
    lp = act_line_coords(field, inv, coords)
    for arr in (quads, mats, pp, lp):
        arr.setflags(write=False)
    return quads, mats, pp, lp


def unimodular_quads(field: Field) -> np.ndarray:
    """All (a, b, c, d) with ad - bc = 1, in lexicographic order of (a, b, c)."""
    q = field.q
    mul, inv, add, neg = field.mul_table, field.inv_table, field.add_table, field.neg_table
    a, b, c = (x.ravel() for x in np.meshgrid(np.arange(q), np.arange(q), np.arange(q), indexing="ij"))
    m = a != 0
    d = mul[add[1, mul[b[m], c[m]]], inv[a[m]]]
    part1 = np.stack([a[m], b[m], c[m], d], axis=1)
    # a = 0: need -bc = 1, i.e. c = -1/b, with d free
    bb, dd = (x.ravel() for x in np.meshgrid(np.arange(1, q), np.arange(q), indexing="ij"))
    part2 = np.stack([np.zeros_like(bb), bb, neg[inv[bb]], dd], axis=1)
    return np.vstack([part1, part2]).astype(np.int64)


@dataclass(frozen=True, eq=False)
class GroupTable(PermGroup):
    """H with conjugacy-class labels."""

    labels: tuple[ConjClassLabel, ...] = ()

    def class_of(self, g: int) -> ConjClassLabel:
        return self.labels[g]

    @cached_property
    def classes(self) -> dict[ConjClassLabel, np.ndarray]:
        out: dict[ConjClassLabel, list[int]] = {lab: [] for lab in expected_class_labels(self.field)}
        for i, lab in enumerate(self.labels):
            out.setdefault(lab, []).append(i)
        return {lab: np.array(v, dtype=np.int64) for lab, v in out.items()}

    def class_sizes(self) -> dict[str, int]:
        return {lab.name: len(v) for lab, v in self.classes.items()}

    @cached_property
    def label_codes(self) -> np.ndarray:
        """Integer code per element: position of its label in ``expected_class_labels``."""
        order = {lab: k for k, lab in enumerate(expected_class_labels(self.field))}
        return np.array([order[lab] for lab in self.labels], dtype=np.int64)


def enumerate_H(field: Field, geom: ConicGeometry | None = None, bound: int | None = None) -> GroupTable:
    """All of H, one entry per distinct tau-image, ordered by matrix entries."""
    _check_bound(field.q, bound)
    quads = unimodular_quads(field)
    mats = tau_arrays(field, quads).reshape(len(quads), 9)
    _, first = np.unique(mats, axis=0, return_index=True)
    quads = np.ascontiguousarray(quads[np.sort(first)])
    order = np.lexsort(tau_arrays(field, quads).reshape(len(quads), 9).T[::-1])
    quads = np.ascontiguousarray(quads[order])
    coords = geom.coords if geom is not None else _coords(field)
    quads, mats3, pp, lp = _build_perm_group(field, quads, coords)
    thetas, pis = theta_values(field), pi_values(field)
    labels = tuple(_label_quad(field, qd, thetas, pis) for qd in quads)
    return GroupTable(field, quads, mats3, pp, lp, labels)


def delta_quad(field: Field) -> np.ndarray:
    """2x2 preimage (1, 0, 0, 1/xi) of the diagonal coset representative d(1, 1/xi, 1/xi^2)."""
    return np.array([1, 0, 0, field.inv_table[field.xi_value]], dtype=np.int64)


def enumerate_G(field: Field, geom: ConicGeometry | None = None, bound: int | None = None,
                H: GroupTable | None = None) -> PermGroup:
    """G = H together with the coset d(1, 1/xi, 1/xi^2)·H."""
    _check_bound(field.q, bound)
    if H is None:
        H = enumerate_H(field, geom, bound)
    F = field
    _, _, _, dinv = delta_quad(F)
    a, b, c, d = (H.quads[:, k] for k in range(4))
    coset = np.stack([a, b, F.mul_table[dinv, c], F.mul_table[dinv, d]], axis=1)
    quads = np.vstack([np.asarray(H.quads), coset])
    coords = geom.coords if geom is not None else _coords(field)
    return PermGroup(field, *_build_perm_group(field, quads, coords))


def _coords(field: Field) -> np.ndarray:
    from .plane import coords_table
    return coords_table(field)


# -- brute-force conjugacy ----------------------------------------------------------

def generator_indices(table: PermGroup) -> list[int]:
    """tau of the elementary matrices E12(x) and E21(x) for every x != 0."""
    F = table.field
    out = []
    for x in range(1, F.q):
        for quad in ((1, x, 0, 1), (1, 0, x, 1)):
            mat = tau_arrays(F, np.array([quad]))
            perm = act_coords(F, mat, _coords(F))[0]
            out.append(table.index_of_perm(perm))
    return out


def conjugacy_classes_bruteforce(table: PermGroup, generators: Iterable[int] | None = None) -> list[np.ndarray]:
    """Conjugacy classes as orbits of conjugation by a generating set (union-find)."""
    n = len(table)
    parent = np.arange(n)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    gens = list(generators) if generators is not None else generator_indices(table)
    for s in gens:
        for h, h2 in enumerate(table.conjugate_all(s)):
            ra, rb = find(h), find(int(h2))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(n)])
    return [np.flatnonzero(roots == r) for r in np.unique(roots)]


def generated_subgroup_size(table: PermGroup, generators: Iterable[int]) -> int:
    """Size of the subgroup generated by ``generators`` (closure by right multiplication)."""
    gens = list(generators)
    seen = {table.identity_index}
    frontier = [table.identity_index]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = table.compose(g, s)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    return len(seen)


# -- intersection parities ----------------------------------------------------------

def hpq_line_images(table: PermGroup, geom: ConicGeometry, p: int) -> np.ndarray:
    """Image of the polar line of ``p`` under every element."""
    return table.line_perm[:, geom.polar_of_point[p]]


def hpq_members(table: PermGroup, geom: ConicGeometry, p: int, q_pt: int) -> np.ndarray:
    """Elements mapping the polar of ``p`` to a passant line through ``q_pt``."""
    images = hpq_line_images(table, geom, p)
    through = np.zeros(geom.n, dtype=bool)
    through[geom.Pa_through(q_pt)] = True
    return np.flatnonzero(through[images])


def hpq_counts(table: GroupTable, geom: ConicGeometry, p: int) -> np.ndarray:
    """(n_labels, n_points) counts |H_{p,x} ∩ C| for every point x at once.

    Row order follows ``expected_class_labels``; columns for non-external x
    are meaningless and left at whatever the passant incidences give.
    """
    images = hpq_line_images(table, geom, p)
    passant = geom.line_class[images] == 0
    labels = table.label_codes[passant]
    n_labels = len(expected_class_labels(table.field))
    counts = np.zeros((n_labels, geom.n), dtype=np.int64)
    for lab, line in zip(labels, images[passant]):
        counts[lab, geom.line_points[line]] += 1
    return counts


def hpq_parity_table(table: GroupTable, geom: ConicGeometry, p: int, q_pt: int) -> dict[str, int]:
    """Parity of |H_{p,q} ∩ C| for every class C of H, plus the union class [4]."""
    members = hpq_members(table, geom, p, q_pt)
    out = {lab.name: 0 for lab in expected_class_labels(table.field)}
    four = 0
    for g in members:
        lab = table.labels[g]
        out[lab.name] ^= 1
        four ^= int(lab.in_four)
    out["[4]"] = four
    return out


def stabilizer(table: PermGroup, p: ProjPoint | int) -> np.ndarray:
    idx = p.index if isinstance(p, ProjPoint) else int(p)
    return table.stabilizer(idx)
