"""PG(2,q), the conic X1^2 = X0*X2, its polarity and the point/line classes.

Points and lines share one canonical coordinate order: (1,a,b) for a, b in
field order, then (0,1,c), then (0,0,1). Index ``a*q + b`` is (1,a,b),
``q*q + c`` is (0,1,c) and ``q*q + q`` is (0,0,1). Because the incidence form
is symmetric, point ``i`` lies on line ``j`` exactly when line ``i`` passes
through point ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum
from functools import cached_property
from typing import Sequence

import numpy as np

from .gf import Field, FieldElement, FieldMismatch


class PointClass(IntEnum):
    """Number of tangent lines through the point."""

    INTERNAL = 0
    ABSOLUTE = 1
    EXTERNAL = 2


class LineClass(IntEnum):
    """Number of conic points on the line."""

    PASSANT = 0
    TANGENT = 1
    SECANT = 2


class PointOnConic(ValueError):
    pass


class DegenerateCoordinates(ValueError):
    pass


# -- coordinates ------------------------------------------------------------

def num_points(q: int) -> int:
    return q * q + q + 1


def coords_table(field: Field) -> np.ndarray:
    """(N, 3) array of normalised coordinates in canonical order."""
    q = field.q
    a, b = np.divmod(np.arange(q * q), q)
    head = np.stack([np.ones(q * q, dtype=np.int64), a, b], axis=1)
    mid = np.stack([np.zeros(q, dtype=np.int64), np.ones(q, dtype=np.int64), np.arange(q)], axis=1)
    tail = np.array([[0, 0, 1]], dtype=np.int64)
    return np.vstack([head, mid, tail])


def normalize_index(field: Field, x, y, z) -> np.ndarray:
    """Canonical index of the projective triple(s) (x, y, z) given as field indices."""
    x, y, z = (np.asarray(v, dtype=np.int64) for v in (x, y, z))
    if np.any((x == 0) & (y == 0) & (z == 0)):
        raise DegenerateCoordinates("(0,0,0) is not a projective point")
    q, mul, inv = field.q, field.mul_table, field.inv_table
    ix = inv[x]
    head = mul[y, ix] * q + mul[z, ix]
    mid = q * q + mul[z, inv[y]]
    return np.where(x != 0, head, np.where(y != 0, mid, q * q + q))


def cross(field: Field, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Row-wise cross product of (n, 3) coordinate arrays over F_q."""
    mul, sub = field.mul_table, field.sub
    return np.stack([
        sub(mul[u[:, 1], v[:, 2]], mul[u[:, 2], v[:, 1]]),
        sub(mul[u[:, 2], v[:, 0]], mul[u[:, 0], v[:, 2]]),
        sub(mul[u[:, 0], v[:, 1]], mul[u[:, 1], v[:, 0]]),
    ], axis=1)


def _bilinear(field: Field, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    add, mul = field.add_table, field.mul_table
    return add[add[mul[u[..., 0], v[..., 0]], mul[u[..., 1], v[..., 1]]], mul[u[..., 2], v[..., 2]]]


def point_discriminant(field: Field, c: np.ndarray) -> np.ndarray:
    """a1^2 - a0*a2 for each row of ``c``."""
    mul = field.mul_table
    return field.sub(mul[c[..., 1], c[..., 1]], mul[c[..., 0], c[..., 2]])


def line_discriminant(field: Field, c: np.ndarray) -> np.ndarray:
    """b1^2 - 4*b0*b2 for each row of ``c``."""
    mul = field.mul_table
    four = field.from_int(4)
    return field.sub(mul[c[..., 1], c[..., 1]], mul[four, mul[c[..., 0], c[..., 2]]])


def polar_coords(field: Field, c: np.ndarray) -> np.ndarray:
    """Point (x,y,z) -> line [z, -2y, x]."""
    minus_two = field.neg_table[field.from_int(2)]
    return np.stack([c[..., 2], field.mul_table[minus_two, c[..., 1]], c[..., 0]], axis=-1)


def polar_line_coords(field: Field, c: np.ndarray) -> np.ndarray:
    """Line [b0,b1,b2] -> point (b0,b1,b2) M^{-1} = (-2 b2, b1, -2 b0)."""
    minus_two = field.neg_table[field.from_int(2)]
    mul = field.mul_table
    return np.stack([mul[minus_two, c[..., 2]], c[..., 1], mul[minus_two, c[..., 0]]], axis=-1)


# -- single objects ---------------------------------------------------------

@dataclass(frozen=True)
class ProjPoint:
    coords: tuple[FieldElement, FieldElement, FieldElement]
    index: int

    @property
    def field(self) -> Field:
        return self.coords[0].field

    def ints(self) -> np.ndarray:
        return np.array([c.value for c in self.coords], dtype=np.int64)

    def __repr__(self) -> str:
        return "(" + ",".join(map(repr, self.coords)) + ")"


@dataclass(frozen=True)
class ProjLine:
    coords: tuple[FieldElement, FieldElement, FieldElement]
    index: int

    @property
    def field(self) -> Field:
        return self.coords[0].field

    def ints(self) -> np.ndarray:
        return np.array([c.value for c in self.coords], dtype=np.int64)

    def __repr__(self) -> str:
        return "[" + ",".join(map(repr, self.coords)) + "]"


def _from_index(field: Field, index: int, cls):
    q = field.q
    if index < q * q:
        raw = (1, index // q, index % q)
    elif index < q * q + q:
        raw = (0, 1, index - q * q)
    elif index == q * q + q:
        raw = (0, 0, 1)
    else:
        raise IndexError(index)
    return cls(tuple(field.element(v) for v in raw), int(index))


def _normalized(field: Field, coords: Sequence, cls):
    vals = [field(c).value for c in coords]
    if len(vals) != 3:
        raise DegenerateCoordinates("expected three coordinates")
    idx = int(normalize_index(field, *vals))
    return _from_index(field, idx, cls)


def make_point(field: Field, coords: Sequence) -> ProjPoint:
    """Normalized point from FieldElements or integers.

    Plain integers embed through the prime subfield (so 3 means 0 in F_9);
    pass FieldElements to name extension-field coordinates.
    """
    return _normalized(field, coords, ProjPoint)


def make_line(field: Field, coords: Sequence) -> ProjLine:
    return _normalized(field, coords, ProjLine)


def _same_field(a, b) -> Field:
    if a.field != b.field:
        raise FieldMismatch("point and line live over different fields")
    return a.field


def incident(p: ProjPoint, l: ProjLine) -> bool:
    field = _same_field(p, l)
    return int(_bilinear(field, p.ints(), l.ints())) == 0


def classify_point(p: ProjPoint) -> PointClass:
    return PointClass(int(p.field.square_class[point_discriminant(p.field, p.ints())]) + 1)


def classify_line(l: ProjLine) -> LineClass:
    return LineClass(int(l.field.square_class[line_discriminant(l.field, l.ints())]) + 1)


def polar(x: ProjPoint | ProjLine) -> ProjLine | ProjPoint:
    field = x.field
    # the coordinate maps return element indices, not integers to embed
    if isinstance(x, ProjPoint):
        c = polar_coords(field, x.ints())
        return _from_index(field, int(normalize_index(field, *c)), ProjLine)
    c = polar_line_coords(field, x.ints())
    return _from_index(field, int(normalize_index(field, *c)), ProjPoint)


# -- the assembled geometry -------------------------------------------------

def _lines_points_table(field: Field, coords: np.ndarray) -> np.ndarray:
    """(N, q+1) sorted point indices on each line, from the line equation."""
    q = field.q
    mul, neg, inv, add = field.mul_table, field.neg_table, field.inv_table, field.add_table
    n = len(coords)
    out = np.empty((n, q + 1), dtype=np.int64)
    b0, b1, b2 = coords[:, 0], coords[:, 1], coords[:, 2]
    a = np.arange(q)

    m = np.flatnonzero(b2 != 0)
    if m.size:
        ib2 = inv[b2[m]]
        # (1, a, -(b0 + a b1)/b2) for every a, then (0, 1, -b1/b2)
        s = add[b0[m][:, None], mul[a[None, :], b1[m][:, None]]]
        b = mul[neg[s], ib2[:, None]]
        out[m, :q] = a[None, :] * q + b
        out[m, q] = q * q + mul[neg[b1[m]], ib2]

    m = np.flatnonzero((b2 == 0) & (b1 != 0))
    if m.size:
        a0 = mul[neg[b0[m]], inv[b1[m]]]
        out[m, :q] = a0[:, None] * q + a[None, :]
        out[m, q] = q * q + q

    m = np.flatnonzero((b2 == 0) & (b1 == 0))
    out[m, :q] = q * q + a[None, :]
    out[m, q] = q * q + q
    out.sort(axis=1)
    return out


def _invert_incidence(n: int, line_points: Sequence[np.ndarray]) -> tuple[np.ndarray, ...]:
    lines = np.concatenate([np.full(len(pts), j, dtype=np.int64) for j, pts in enumerate(line_points)])
    pts = np.concatenate(line_points)
    order = np.lexsort((lines, pts))
    counts = np.bincount(pts, minlength=n)
    return tuple(np.split(lines[order], np.cumsum(counts)[:-1]))


@dataclass(frozen=True, eq=False)
class ConicGeometry:
    """PG(2,q) with the standard conic, fully classified. Read-only after build."""

    field: Field
    coords: np.ndarray
    conic: np.ndarray
    point_class: np.ndarray
    line_class: np.ndarray
    polar_of_point: np.ndarray
    polar_of_line: np.ndarray
    line_points: tuple[np.ndarray, ...]
    point_lines: tuple[np.ndarray, ...]

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def n(self) -> int:
        return len(self.coords)

    def point(self, i: int) -> ProjPoint:
        return _from_index(self.field, int(i), ProjPoint)

    def line(self, j: int) -> ProjLine:
        return _from_index(self.field, int(j), ProjLine)

    @cached_property
    def points(self) -> list[ProjPoint]:
        return [self.point(i) for i in range(self.n)]

    @cached_property
    def lines(self) -> list[ProjLine]:
        return [self.line(j) for j in range(self.n)]

    def index_of(self, coords: Sequence) -> int:
        """Canonical index of a triple given as field-element indices or FieldElements."""
        vals = [c.value if isinstance(c, FieldElement) else int(c) for c in coords]
        return int(normalize_index(self.field, *vals))

    # class index lists, canonical order
    @cached_property
    def E(self) -> np.ndarray:
        return np.flatnonzero(self.point_class == PointClass.EXTERNAL)

    @cached_property
    def I(self) -> np.ndarray:  # noqa: E743
        return np.flatnonzero(self.point_class == PointClass.INTERNAL)

    @cached_property
    def Abs(self) -> np.ndarray:
        return np.flatnonzero(self.point_class == PointClass.ABSOLUTE)

    @cached_property
    def Pa(self) -> np.ndarray:
        return np.flatnonzero(self.line_class == LineClass.PASSANT)

    @cached_property
    def T(self) -> np.ndarray:
        return np.flatnonzero(self.line_class == LineClass.TANGENT)

    @cached_property
    def Se(self) -> np.ndarray:
        return np.flatnonzero(self.line_class == LineClass.SECANT)

    @cached_property
    def E_pos(self) -> np.ndarray:
        """Position of each point within ``E`` (-1 if not external)."""
        pos = np.full(self.n, -1, dtype=np.int64)
        pos[self.E] = np.arange(len(self.E))
        return pos

    @cached_property
    def I_pos(self) -> np.ndarray:
        pos = np.full(self.n, -1, dtype=np.int64)
        pos[self.I] = np.arange(len(self.I))
        return pos

    # -- joins and meets ----------------------------------------------------

    def join(self, p1, p2) -> np.ndarray | int:
        """Line(s) through points p1 != p2 (index arrays broadcast)."""
        a, b = np.atleast_1d(p1), np.atleast_1d(p2)
        a, b = np.broadcast_arrays(a, b)
        c = cross(self.field, self.coords[a.ravel()], self.coords[b.ravel()])
        out = normalize_index(self.field, c[:, 0], c[:, 1], c[:, 2]).reshape(a.shape)
        return int(out[0]) if np.ndim(p1) == 0 and np.ndim(p2) == 0 else out

    # the cross product is the same computation for lines
    meet = join

    # -- neighbourhoods -----------------------------------------------------

    def points_on(self, line: int, cls: PointClass | None = None) -> np.ndarray:
        pts = self.line_points[line]
        return pts if cls is None else pts[self.point_class[pts] == cls]

    def lines_through(self, point: int, cls: LineClass | None = None) -> np.ndarray:
        lns = self.point_lines[point]
        return lns if cls is None else lns[self.line_class[lns] == cls]

    def E_on(self, line: int) -> np.ndarray:
        return self.points_on(line, PointClass.EXTERNAL)

    def I_on(self, line: int) -> np.ndarray:
        return self.points_on(line, PointClass.INTERNAL)

    def _off_conic(self, p: int) -> None:
        if self.point_class[p] == PointClass.ABSOLUTE:
            raise PointOnConic(f"point {p} lies on the conic")

    def Pa_through(self, p: int) -> np.ndarray:
        self._off_conic(p)
        return self.lines_through(p, LineClass.PASSANT)

    def Se_through(self, p: int) -> np.ndarray:
        self._off_conic(p)
        return self.lines_through(p, LineClass.SECANT)

    def T_through(self, p: int) -> np.ndarray:
        return self.lines_through(p, LineClass.TANGENT)

    def N_PaE(self, p: int) -> np.ndarray:
        """External points on the passant lines through ``p``."""
        lines = self.Pa_through(p)
        if not len(lines):
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate([self.E_on(l) for l in lines]))

    def N_SeE(self, p: int) -> np.ndarray:
        """External points on the secant lines through ``p``."""
        lines = self.Se_through(p)
        if not len(lines):
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate([self.E_on(l) for l in lines]))

    def neighborhoods(self, p: int) -> dict[str, np.ndarray]:
        perp = int(self.polar_of_point[p])
        return {
            "E_perp": self.E_on(perp),
            "I_perp": self.I_on(perp),
            "Pa": self.Pa_through(p),
            "Se": self.Se_through(p),
            "T": self.T_through(p),
            "N_PaE": self.N_PaE(p),
            "N_SeE": self.N_SeE(p),
        }

    def chi(self, points: np.ndarray) -> np.ndarray:
        """Integer indicator vector over E (length |E|) of the external points given."""
        v = np.zeros(len(self.E), dtype=np.int64)
        pos = self.E_pos[np.asarray(points, dtype=np.int64)]
        np.add.at(v, pos[pos >= 0], 1)
        return v


def build_geometry(field: Field) -> ConicGeometry:
    q = field.q
    if q % 2 == 0:
        raise ValueError("q must be odd")
    coords = coords_table(field)
    n = len(coords)

    pclass = (field.square_class[point_discriminant(field, coords)] + 1).astype(np.int8)
    lclass = (field.square_class[line_discriminant(field, coords)] + 1).astype(np.int8)

    t = np.arange(q)
    conic = np.sort(np.append(t * q + field.mul_table[t, t], q * q + q))

    pc = polar_coords(field, coords)
    polar_pt = normalize_index(field, pc[:, 0], pc[:, 1], pc[:, 2])
    polar_ln = np.empty(n, dtype=np.int64)
    polar_ln[polar_pt] = np.arange(n)

    lp = _lines_points_table(field, coords)
    line_points = tuple(lp)
    point_lines = _invert_incidence(n, line_points)

    arrays = (conic, pclass, lclass, polar_pt, polar_ln, *line_points, *point_lines)
    for arr in arrays:
        arr.setflags(write=False)
    coords.setflags(write=False)
    return ConicGeometry(field, coords, conic, pclass, lclass, polar_pt, polar_ln, line_points, point_lines)


def flip_incidence(geom: ConicGeometry, point: int, line: int) -> ConicGeometry:
    """Copy of ``geom`` with one point-line incidence toggled.

    Test hook: the result is no longer a projective plane, and the audit
    suite is expected to notice.
    """
    pts = geom.line_points[line]
    if point in pts:
        new = pts[pts != point]
    else:
        new = np.sort(np.append(pts, point))
    new.setflags(write=False)
    line_points = geom.line_points[:line] + (new,) + geom.line_points[line + 1:]
    return replace(geom, line_points=line_points, point_lines=_invert_incidence(geom.n, line_points))
