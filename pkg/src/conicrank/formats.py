"""Text serializations of GF(2) matrices: alist, dense bits, JSON and CSV.

alist layout (one record per line, LF endings, no zero padding)::

    rows cols
    max_row_weight max_col_weight
    <row weights>
    <column weights>
    <1-based column indices of each row>      (one line per row)
    <1-based row indices of each column>      (one line per column)
"""

from __future__ import annotations

import json

import numpy as np

from .gf2mat import Gf2Matrix
from .incidence import LabeledMatrix

FORMATS = ("alist", "bits", "json", "csv")


class FormatError(ValueError):
    pass


def _join(values) -> str:
    return " ".join(str(int(v)) for v in values)


def to_alist(m: Gf2Matrix) -> str:
    dense = m.to_dense()
    rw, cw = dense.sum(axis=1), dense.sum(axis=0)
    lines = [f"{m.rows} {m.cols}",
             f"{int(rw.max(initial=0))} {int(cw.max(initial=0))}",
             _join(rw), _join(cw)]
    lines += [_join(np.flatnonzero(row) + 1) for row in dense]
    lines += [_join(np.flatnonzero(col) + 1) for col in dense.T]
    return "\n".join(lines) + "\n"


def _ints(line: str) -> list[int]:
    try:
        return [int(t) for t in line.split()]
    except ValueError as exc:
        raise FormatError(f"non-integer token in {line!r}") from exc


def parse_alist(text: str) -> Gf2Matrix:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 4:
        raise FormatError("alist needs at least four header lines")
    head = _ints(lines[0])
    if len(head) != 2:
        raise FormatError("first line must be 'rows cols'")
    rows, cols = head
    if len(lines) != 4 + rows + cols:
        raise FormatError(f"expected {4 + rows + cols} lines, found {len(lines)}")
    max_rw, max_cw = _ints(lines[1])
    rw, cw = _ints(lines[2]), _ints(lines[3])
    if len(rw) != rows or len(cw) != cols:
        raise FormatError("weight lines have the wrong length")
    dense = np.zeros((rows, cols), dtype=np.uint8)
    for i in range(rows):
        idx = _ints(lines[4 + i])
        if len(idx) != rw[i] or any(not 1 <= j <= cols for j in idx):
            raise FormatError(f"row {i + 1} list disagrees with its weight or range")
        dense[i, np.array(idx, dtype=np.int64) - 1] = 1
    by_col = np.zeros_like(dense)
    for j in range(cols):
        idx = _ints(lines[4 + rows + j])
        if len(idx) != cw[j] or any(not 1 <= i <= rows for i in idx):
            raise FormatError(f"column {j + 1} list disagrees with its weight or range")
        by_col[np.array(idx, dtype=np.int64) - 1, j] = 1
    if not np.array_equal(dense, by_col):
        raise FormatError("row and column lists describe different matrices")
    if max_rw != max(rw, default=0) or max_cw != max(cw, default=0):
        raise FormatError("maximum weights are inconsistent")
    return Gf2Matrix.from_dense(dense)


def to_bits(m: Gf2Matrix) -> str:
    dense = m.to_dense()
    return "".join("".join("1" if b else "0" for b in row) + "\n" for row in dense)


def parse_bits(text: str) -> Gf2Matrix:
    rows = [ln for ln in text.split("\n") if ln != ""]
    if not rows:
        raise FormatError("empty bit matrix")
    if len({len(r) for r in rows}) != 1 or any(set(r) - {"0", "1"} for r in rows):
        raise FormatError("bit rows must be equal-length strings over {0,1}")
    return Gf2Matrix.from_dense(np.array([[c == "1" for c in r] for r in rows], dtype=np.uint8))


def to_csv(m: Gf2Matrix) -> str:
    return "".join(",".join(map(str, row.tolist())) + "\n" for row in m.to_dense())


def parse_csv(text: str) -> Gf2Matrix:
    return parse_bits(text.replace(",", ""))


def to_json(lm: LabeledMatrix) -> str:
    dense = lm.matrix.to_dense()
    doc = {
        "name": lm.name,
        "rows": lm.matrix.rows,
        "cols": lm.matrix.cols,
        "row_kind": lm.row_kind,
        "col_kind": lm.col_kind,
        "row_labels": lm.row_labels.tolist(),
        "col_labels": lm.col_labels.tolist(),
        "row_indices": [np.flatnonzero(r).tolist() for r in dense],
    }
    return json.dumps(doc, sort_keys=True) + "\n"


def parse_json(text: str) -> Gf2Matrix:
    try:
        doc = json.loads(text)
        rows, cols = int(doc["rows"]), int(doc["cols"])
        dense = np.zeros((rows, cols), dtype=np.uint8)
        if len(doc["row_indices"]) != rows:
            raise FormatError("row_indices length differs from rows")
        for i, idx in enumerate(doc["row_indices"]):
            dense[i, np.asarray(idx, dtype=np.int64)] = 1
    except (KeyError, TypeError, IndexError, json.JSONDecodeError) as exc:
        raise FormatError(f"malformed matrix JSON: {exc}") from exc
    return Gf2Matrix.from_dense(dense)


def serialize(lm: LabeledMatrix, fmt: str) -> str:
    if fmt == "alist":
        return to_alist(lm.matrix)
    if fmt == "bits":
        return to_bits(lm.matrix)
    if fmt == "csv":
        return to_csv(lm.matrix)
    if fmt == "json":
        return to_json(lm)
    raise FormatError(f"unknown format {fmt!r}")


def parse(text: str, fmt: str) -> Gf2Matrix:
    parsers = {"alist": parse_alist, "bits": parse_bits, "csv": parse_csv, "json": parse_json}
    if fmt not in parsers:
        raise FormatError(f"unknown format {fmt!r}")
    return parsers[fmt](text)
