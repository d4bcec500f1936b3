"""Incidence matrices of the conic geometry and the code dimensions they give.

Every matrix is built from an immutable :class:`ConicGeometry` and carries the
canonical indices of its row and column objects. Entries are read straight off
the line/point incidence lists, so a corrupted geometry yields corrupted
matrices rather than silently repaired ones.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from itertools import combinations

import numpy as np

from .gf2mat import Gf2Matrix
from .plane import ConicGeometry, LineClass, PointClass

MATRIX_NAMES = ("A", "A11", "A12", "A13", "A21", "A22", "A23", "A31", "A32", "A33",
                "B", "B0", "D", "Dprime")

# block A_ij: i picks the point class (rows), j the line class (columns)
_BLOCK_POINTS = {1: PointClass.ABSOLUTE, 2: PointClass.INTERNAL, 3: PointClass.EXTERNAL}
_BLOCK_LINES = {1: LineClass.TANGENT, 2: LineClass.SECANT, 3: LineClass.PASSANT}


class UnknownMatrix(KeyError):
    pass


@dataclass(frozen=True, eq=False)
class LabeledMatrix:
    """A GF(2) matrix whose rows and columns are named geometry objects.

    ``row_kind``/``col_kind`` say whether the labels index points or lines.
    """

    name: str
    matrix: Gf2Matrix
    row_labels: np.ndarray
    col_labels: np.ndarray
    row_kind: str
    col_kind: str

    def __post_init__(self) -> None:
        if self.matrix.shape != (len(self.row_labels), len(self.col_labels)):
            raise ValueError(f"{self.name}: labels do not match matrix shape {self.matrix.shape}")
        for labels in (self.row_labels, self.col_labels):
            if len(labels) > 1 and not np.all(np.diff(labels) > 0):
                raise ValueError(f"{self.name}: labels must be strictly increasing")

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def transpose(self, name: str) -> LabeledMatrix:
        return LabeledMatrix(name, self.matrix.T, self.col_labels, self.row_labels,
                             self.col_kind, self.row_kind)


def _labeled(name, dense, rows, cols, row_kind, col_kind) -> LabeledMatrix:
    for a in (rows, cols):
        a.setflags(write=False)
    return LabeledMatrix(name, Gf2Matrix.from_dense(dense), rows, cols, row_kind, col_kind)


def _dense_incidence(geom: ConicGeometry) -> np.ndarray:
    a = np.zeros((geom.n, geom.n), dtype=np.uint8)
    for j, pts in enumerate(geom.line_points):
        a[pts, j] = 1
    return a


def build_A(geom: ConicGeometry) -> LabeledMatrix:
    """Full point-by-line incidence matrix."""
    idx = np.arange(geom.n)
    return _labeled("A", _dense_incidence(geom), idx, idx.copy(), "point", "line")


def build_block(geom: ConicGeometry, point_class: PointClass, line_class: LineClass,
                name: str | None = None) -> LabeledMatrix:
    """Rows: points of ``point_class``; columns: lines of ``line_class``."""
    rows = np.flatnonzero(geom.point_class == point_class)
    cols = np.flatnonzero(geom.line_class == line_class)
    row_pos = np.full(geom.n, -1, dtype=np.int64)
    row_pos[rows] = np.arange(len(rows))
    dense = np.zeros((len(rows), len(cols)), dtype=np.uint8)
    for k, j in enumerate(cols):
        r = row_pos[geom.line_points[j]]
        dense[r[r >= 0], k] = 1
    if name is None:
        name = f"{PointClass(point_class).name}x{LineClass(line_class).name}"
    return _labeled(name, dense, rows, cols, "point", "line")


def build_named_block(geom: ConicGeometry, name: str) -> LabeledMatrix:
    """``A11`` .. ``A33``: rows absolute/internal/external, columns tangent/secant/passant."""
    i, j = int(name[1]), int(name[2])
    return build_block(geom, _BLOCK_POINTS[i], _BLOCK_LINES[j], name)


def build_B(geom: ConicGeometry) -> LabeledMatrix:
    """Rows E, columns I; entry (e, p) is 1 iff e lies on the polar line of p."""
    E, I = geom.E, geom.I
    dense = np.zeros((len(E), len(I)), dtype=np.uint8)
    for k, p in enumerate(I):
        r = geom.E_pos[geom.line_points[geom.polar_of_point[p]]]
        dense[r[r >= 0], k] = 1
    return _labeled("B", dense, E.copy(), I.copy(), "point", "point")


def build_B0(geom: ConicGeometry) -> LabeledMatrix:
    return build_B(geom).transpose("B0")


def _pairs_by_line_class(geom: ConicGeometry, cls: LineClass, name: str) -> LabeledMatrix:
    # (e, p) is set iff the unique line through e and p has class ``cls``
    E, I = geom.E, geom.I
    dense = np.zeros((len(E), len(I)), dtype=np.uint8)
    for j in np.flatnonzero(geom.line_class == cls):
        pts = geom.line_points[j]
        er = geom.E_pos[pts]
        ic = geom.I_pos[pts]
        dense[np.ix_(er[er >= 0], ic[ic >= 0])] = 1
    return _labeled(name, dense, E.copy(), I.copy(), "point", "point")


def build_D(geom: ConicGeometry) -> LabeledMatrix:
    """Column p is the indicator of N_PaE(p) over E."""
    return _pairs_by_line_class(geom, LineClass.PASSANT, "D")


def build_Dprime(geom: ConicGeometry) -> LabeledMatrix:
    """Column p is the indicator of N_SeE(p) over E."""
    return _pairs_by_line_class(geom, LineClass.SECANT, "Dprime")


def build_matrix(geom: ConicGeometry, name: str) -> LabeledMatrix:
    if name == "A":
        return build_A(geom)
    if name in MATRIX_NAMES and name.startswith("A"):
        return build_named_block(geom, name)
    builders = {"B": build_B, "B0": build_B0, "D": build_D, "Dprime": build_Dprime}
    if name not in builders:
        raise UnknownMatrix(name)
    return builders[name](geom)


# -- tangent spans ----------------------------------------------------------

def tangent_vectors(geom: ConicGeometry) -> np.ndarray:
    """(|T|, |E|) array: row k is the indicator over E of the k-th tangent line."""
    out = np.zeros((len(geom.T), len(geom.E)), dtype=np.uint8)
    for k, j in enumerate(geom.T):
        r = geom.E_pos[geom.line_points[j]]
        out[k, r[r >= 0]] = 1
    return out


@dataclass(frozen=True, eq=False)
class TangentSpans:
    """M1: span of tangent indicators on E. M2: span of their pairwise sums."""

    M1: Gf2Matrix
    M2: Gf2Matrix

    @property
    def dim_M1(self) -> int:
        return self.M1.rank2()

    @property
    def dim_M2(self) -> int:
        return self.M2.rank2()


def tangent_spans(geom: ConicGeometry) -> TangentSpans:
    chi = tangent_vectors(geom)
    pairs = [chi[a] ^ chi[b] for a, b in combinations(range(len(chi)), 2)]
    m2 = np.array(pairs, dtype=np.uint8).T if pairs else np.zeros((len(geom.E), 0), np.uint8)
    return TangentSpans(Gf2Matrix.from_dense(chi.T), Gf2Matrix.from_dense(m2))


# -- dimensions -------------------------------------------------------------

def conjectured_dims(q: int) -> tuple[int, int]:
    """Closed forms for (dim L, dim L0)."""
    base = (q * q - 1) // 4
    if q % 4 == 1:
        return base - q, base
    return base - q + 1, base + 1


@dataclass(frozen=True)
class DimensionReport:
    q: int
    rank_B: int
    dim_L: int
    dim_L0: int
    rank_D: int
    rank_Dprime: int
    congruence_class: int
    conjecture_dim_L: int
    conjecture_dim_L0: int
    match: bool

    def to_dict(self) -> dict:
        return asdict(self)


def dimension_report(geom: ConicGeometry, with_d: bool = True) -> DimensionReport:
    """Ranks of B, D, D' and the null-space dimensions of B and its transpose.

    ``with_d=False`` skips D and D' (reported as -1), which is all the
    dimension table needs.
    """
    q = geom.q
    b = build_B(geom).matrix
    rank_b = b.rank2()
    dim_l = len(geom.I) - rank_b
    dim_l0 = len(geom.E) - rank_b
    rank_d = build_D(geom).matrix.rank2() if with_d else -1
    rank_dp = build_Dprime(geom).matrix.rank2() if with_d else -1
    cl, cl0 = conjectured_dims(q)
    return DimensionReport(q, rank_b, dim_l, dim_l0, rank_d, rank_dp, q % 4, cl, cl0,
                           dim_l == cl and dim_l0 == cl0)
