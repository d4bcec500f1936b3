"""Numpy implementation of the GF(2) elimination kernels.

Same contract as the compiled ``_gf2_core`` module; used when the extension
is not built or when ``CONICRANK_PURE=1`` is set.
"""

import numpy as np


def echelonize(w: np.ndarray, ncols: int, full: bool) -> np.ndarray:
    nrows = w.shape[0]
    r = 0
    pivots = []
    for c in range(ncols):
        if r == nrows:
            break
        word = c >> 6
        mask = np.uint64(1 << (c & 63))
        below = np.flatnonzero(w[r:, word] & mask)
        if below.size == 0:
            continue
        piv = r + int(below[0])
        if piv != r:
            w[[r, piv], word:] = w[[piv, r], word:]
        if full:
            hits = np.flatnonzero(w[:, word] & mask)
            hits = hits[hits != r]
        else:
            hits = r + below[1:] if piv == r else r + 1 + np.flatnonzero(w[r + 1:, word] & mask)
        if hits.size:
            w[hits, word:] ^= w[r, word:]
        pivots.append(c)
        r += 1
    return np.asarray(pivots, dtype=np.int64)


def reduce_vector(basis: np.ndarray, pivots: np.ndarray, v: np.ndarray) -> None:
    for i, c in enumerate(pivots.tolist()):
        word = c >> 6
        if (int(v[word]) >> (c & 63)) & 1:
            v[word:] ^= basis[i, word:]
