"""Bit-packed 0-1 matrices over GF(2).

Rows are packed little-endian into uint64 words: column ``j`` is bit ``j & 63``
of word ``j >> 6``. Elimination runs in the compiled ``_gf2_core`` extension
when it is importable and in a numpy fallback otherwise; set
``CONICRANK_PURE=1`` to force the fallback.
"""

from __future__ import annotations

import os
import sys
from types import ModuleType
from typing import Iterable, Sequence

import numpy as np

from . import _gf2_fallback

if sys.byteorder != "little":  # pragma: no cover
    raise ImportError("bit packing assumes a little-endian host")

WORD = 64


class DimensionMismatch(ValueError):
    pass


def _load_kernels() -> tuple[ModuleType, str]:
    if os.environ.get("CONICRANK_PURE", "") not in ("", "0"):
        return _gf2_fallback, "numpy"
    try:
        from . import _gf2_core
    except ImportError:
        return _gf2_fallback, "numpy"
    return _gf2_core, "cython"


_kernels, BACKEND = _load_kernels()


def kernels(name: str | None = None) -> ModuleType:
    """Kernel module by name ('cython' or 'numpy'); default is the active one."""
    if name is None:
        return _kernels
    if name == "numpy":
        return _gf2_fallback
    if name == "cython":
        from . import _gf2_core
        return _gf2_core
    raise ValueError(f"unknown backend {name!r}")


def nwords(ncols: int) -> int:
    return (ncols + WORD - 1) // WORD


def pack_rows(dense: np.ndarray) -> np.ndarray:
    """Pack a 2-D 0/1 array into a C-contiguous (rows, words) uint64 array."""
    dense = np.asarray(dense)
    if dense.ndim != 2:
        raise DimensionMismatch("expected a 2-D array")
    r, c = dense.shape
    nw = nwords(c)
    padded = np.zeros((r, nw * WORD), dtype=np.uint8)
    padded[:, :c] = dense & 1 if dense.dtype != np.bool_ else dense
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed.view("<u8").astype(np.uint64, copy=False))


def unpack_rows(words: np.ndarray, ncols: int) -> np.ndarray:
    if words.shape[1] == 0:
        return np.zeros((words.shape[0], ncols), dtype=np.uint8)
    bits = np.unpackbits(np.ascontiguousarray(words).view(np.uint8), axis=1, bitorder="little")
    return bits[:, :ncols]


def pack_vector(v: Sequence[int] | np.ndarray, length: int) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (length,):
        raise DimensionMismatch(f"vector of length {v.shape} does not match {length}")
    return pack_rows(v.reshape(1, -1) & 1)[0].copy()


class Gf2Matrix:
    """Immutable bit-packed matrix over GF(2)."""

    __slots__ = ("rows", "cols", "data", "_colspace")

    def __init__(self, rows: int, cols: int, data: np.ndarray):
        data = np.ascontiguousarray(data, dtype=np.uint64)
        if data.shape != (rows, nwords(cols)):
            raise DimensionMismatch(f"data shape {data.shape} inconsistent with {rows}x{cols}")
        if cols % WORD and rows:
            pad = ~np.uint64((1 << (cols % WORD)) - 1)
            if np.any(data[:, -1] & pad):
                raise ValueError("non-zero padding bits")
        data.setflags(write=False)
        self.rows = rows
        self.cols = cols
        self.data = data
        self._colspace = None

    # -- construction --------------------------------------------------

    @classmethod
    def from_dense(cls, dense) -> Gf2Matrix:
        dense = np.asarray(dense)
        return cls(dense.shape[0], dense.shape[1], pack_rows(dense))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> Gf2Matrix:
        return cls(rows, cols, np.zeros((rows, nwords(cols)), dtype=np.uint64))

    @classmethod
    def identity(cls, n: int) -> Gf2Matrix:
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_columns(cls, nrows: int, columns: Sequence[Iterable[int]]) -> Gf2Matrix:
        """Matrix whose column ``j`` has ones at the row indices ``columns[j]``."""
        dense = np.zeros((nrows, len(columns)), dtype=np.uint8)
        for j, col in enumerate(columns):
            dense[np.fromiter(col, dtype=np.int64), j] = 1
        return cls.from_dense(dense)

    # -- views ---------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def to_dense(self) -> np.ndarray:
        return unpack_rows(self.data, self.cols)

    @property
    def T(self) -> Gf2Matrix:
        return Gf2Matrix.from_dense(self.to_dense().T)

    def row(self, i: int) -> np.ndarray:
        return unpack_rows(self.data[i:i + 1], self.cols)[0]

    def column(self, j: int) -> np.ndarray:
        return ((self.data[:, j >> 6] >> np.uint64(j & 63)) & np.uint64(1)).astype(np.uint8)

    def row_weights(self) -> np.ndarray:
        return self.to_dense().sum(axis=1, dtype=np.int64)

    def col_weights(self) -> np.ndarray:
        return self.to_dense().sum(axis=0, dtype=np.int64)

    def hstack(self, other: Gf2Matrix) -> Gf2Matrix:
        if other.rows != self.rows:
            raise DimensionMismatch("row counts differ")
        return Gf2Matrix.from_dense(np.hstack([self.to_dense(), other.to_dense()]))

    def matvec(self, v) -> np.ndarray:
        """M·v over GF(2) for a 0/1 vector of length ``cols``."""
        packed = pack_vector(v, self.cols)
        prod = self.data & packed[None, :]
        bits = np.unpackbits(prod.view(np.uint8), axis=1)
        return (bits.sum(axis=1) & 1).astype(np.uint8)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Gf2Matrix) and self.shape == other.shape
                and bool(np.array_equal(self.data, other.data)))

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"Gf2Matrix({self.rows}x{self.cols})"

    # -- linear algebra -------------------------------------------------

    def _echelon(self, full: bool) -> tuple[np.ndarray, np.ndarray]:
        work = self.data.copy()
        pivots = _kernels.echelonize(work, self.cols, full)
        return work[: len(pivots)], np.ascontiguousarray(pivots, dtype=np.int64)

    def rank2(self) -> int:
        return len(self._echelon(full=False)[1])

    def nullspace_dim(self) -> int:
        return self.cols - self.rank2()

    def nullspace_basis(self) -> list[np.ndarray]:
        """Basis of {v : Mv = 0}, one vector per free column (reduced echelon form)."""
        basis_rows, pivots = self._echelon(full=True)
        dense = unpack_rows(basis_rows, self.cols)
        pivot_set = set(pivots.tolist())
        out = []
        for f in range(self.cols):
            if f in pivot_set:
                continue
            v = np.zeros(self.cols, dtype=np.uint8)
            v[f] = 1
            v[pivots] = dense[:, f]
            out.append(v)
        return out

    def _colspace_echelon(self) -> tuple[np.ndarray, np.ndarray]:
        # reduced row basis of M^T; cached since the matrix is immutable
        if self._colspace is None:
            self._colspace = self.T._echelon(full=True)
        return self._colspace

    def colspace_rank(self) -> int:
        return len(self._colspace_echelon()[1])

    def in_colspace(self, v) -> bool:
        basis, pivots = self._colspace_echelon()
        work = pack_vector(v, self.rows)
        _kernels.reduce_vector(basis, pivots, work)
        return not work.any()

    def colspace_dim_union(self, extra: Sequence[Sequence[int]] | np.ndarray | Gf2Matrix) -> int:
        """Dimension of the span of M's columns together with ``extra`` vectors."""
        if isinstance(extra, Gf2Matrix):
            if extra.rows != self.rows:
                raise DimensionMismatch("extra columns have the wrong length")
            extra_rows = extra.T.data
        else:
            ext = np.asarray(extra, dtype=np.uint8).reshape(-1, self.rows) if len(extra) else np.zeros((0, self.rows), np.uint8)
            extra_rows = pack_rows(ext)
        stacked = np.vstack([self.T.data, extra_rows])
        return len(_kernels.echelonize(np.ascontiguousarray(stacked), self.rows, False))


def rank2(m: Gf2Matrix) -> int:
    return m.rank2()


def nullspace_dim(m: Gf2Matrix) -> int:
    return m.nullspace_dim()


def nullspace_basis(m: Gf2Matrix) -> list[np.ndarray]:
    return m.nullspace_basis()


def in_colspace(m: Gf2Matrix, v) -> bool:
    return m.in_colspace(v)


def colspace_dim_union(m: Gf2Matrix, extra) -> int:
    return m.colspace_dim_union(extra)


def colspace_contains(big: Gf2Matrix, small: Gf2Matrix) -> bool:
    """True iff every column of ``small`` lies in the column space of ``big``."""
    return big.colspace_dim_union(small) == big.colspace_rank()


def colspace_equal(a: Gf2Matrix, b: Gf2Matrix) -> bool:
    return colspace_contains(a, b) and colspace_contains(b, a)

