# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled GF(2) elimination on row-major uint64 bit-packed matrices.

Column j lives in word j >> 6 at bit j & 63. Both entry points mutate
their input in place; callers pass private copies.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()


def echelonize(uint64_t[:, ::1] w, Py_ssize_t ncols, bint full):
    """Row-reduce ``w`` in place and return the pivot columns.

    Pivots are chosen leftmost column first, lowest available row first.
    With ``full`` set the result is reduced (pivot columns cleared above too).
    """
    cdef Py_ssize_t nrows = w.shape[0]
    cdef Py_ssize_t nw = w.shape[1]
    cdef Py_ssize_t r = 0, c, i, k, piv, word, start
    cdef uint64_t mask, tmp
    cdef int64_t[::1] out
    pivots = np.empty(min(nrows, ncols), dtype=np.int64)
    out = pivots
    with nogil:
        for c in range(ncols):
            if r == nrows:
                break
            word = c >> 6
            mask = (<uint64_t>1) << (c & 63)
            piv = -1
            for i in range(r, nrows):
                if w[i, word] & mask:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != r:
                for k in range(word, nw):
                    tmp = w[r, k]
                    w[r, k] = w[piv, k]
                    w[piv, k] = tmp
            start = 0 if full else r + 1
            for i in range(start, nrows):
                if i != r and (w[i, word] & mask):
                    for k in range(word, nw):
                        w[i, k] ^= w[r, k]
            out[r] = c
            r += 1
    return pivots[:r]


def reduce_vector(const uint64_t[:, ::1] basis, const int64_t[::1] pivots, uint64_t[::1] v):
    """Reduce ``v`` in place against echelon rows ``basis`` with given pivots."""
    cdef Py_ssize_t rank = pivots.shape[0]
    cdef Py_ssize_t nw = v.shape[0]
    cdef Py_ssize_t i, k, word
    cdef int64_t c
    with nogil:
        for i in range(rank):
            c = pivots[i]
            word = c >> 6
            if v[word] & ((<uint64_t>1) << (c & 63)):
                for k in range(word, nw):
                    v[k] ^= basis[i, k]
