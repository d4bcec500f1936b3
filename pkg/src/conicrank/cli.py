"""Command-line entry point: dimension tables, lemma audits, exports and dumps."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gf import FieldError, field_for_order, parse_modulus, prime_power
from .group import DEFAULT_GROUP_BOUND, BoundExceeded, enumerate_H, group_bound
from .incidence import MATRIX_NAMES, UnknownMatrix, build_matrix, dimension_report
from .formats import FORMATS, serialize
from .plane import LineClass, PointClass, build_geometry
from .verify import DEPTHS, run_suite, verdicts_json, _class_counts

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

DIMS_FIELDS = ("q", "congruence_class", "rank_B", "dim_L", "dim_L0", "conjecture_dim_L",
               "conjecture_dim_L0", "match", "error")


class ExportCheckFailed(AssertionError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    q: tuple[int, ...]
    irr: tuple[int, ...] | None = None
    matrix: str | None = None
    format: str = "alist"
    out: str | None = None
    group_bound: int = DEFAULT_GROUP_BOUND
    threads: int = 1
    depth: str = "geometry"

    def __post_init__(self) -> None:
        if (self.matrix is not None) != (self.command == "export"):
            raise ValueError("matrix is required for export and only for export")
        if self.threads < 1:
            raise ValueError("threads must be positive")

    @classmethod
    def from_args(cls, args: argparse.Namespace, qs: tuple[int, ...]) -> RunConfig:
        return cls(command=args.command, q=qs, irr=args.irr, matrix=getattr(args, "matrix", None),
                   format=getattr(args, "format", "alist"), out=args.out,
                   group_bound=group_bound(getattr(args, "group_bound", None)),
                   threads=getattr(args, "threads", 1), depth=getattr(args, "depth", "geometry"))


def odd_prime_power(text: str) -> int:
    try:
        q = int(text)
        p, _ = prime_power(q)
    except (ValueError, FieldError) as exc:
        raise argparse.ArgumentTypeError(f"{text!r} is not an odd prime power") from exc
    if p == 2:
        raise argparse.ArgumentTypeError(f"{text!r} is not an odd prime power")
    return q


def q_values(tokens: Sequence[str]) -> tuple[int, ...]:
    """Integers, or inclusive ranges 'a..b' expanded to the odd prime powers inside them."""
    out: list[int] = []
    for tok in tokens:
        if ".." in tok:
            lo, hi = (int(x) for x in tok.split("..", 1))
            for q in range(lo, hi + 1):
                try:
                    if prime_power(q)[0] != 2:
                        out.append(q)
                except FieldError:
                    pass
        else:
            out.append(int(tok))
    return tuple(out)


def _threads(text: str) -> int:
    if text == "auto":
        return os.cpu_count() or 1
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("threads must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conicrank", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, multi=False):
        if multi:
            p.add_argument("--q", nargs="+", required=True, help="q values or ranges like 3..27")
        else:
            p.add_argument("--q", type=odd_prime_power, required=True)
        p.add_argument("--irr", type=parse_modulus, default=None,
                       help="irreducible modulus, constant term first, e.g. 1,0,1")
        p.add_argument("--out", default=None, help="output path (default stdout)")

    d = sub.add_parser("dims", help="rank of B and code dimensions per q")
    common(d, multi=True)
    d.add_argument("--format", choices=("csv", "json"), default="csv")
    d.add_argument("--threads", type=_threads, default=1)

    v = sub.add_parser("verify", help="lemma audit for one q (exit 0 iff all pass)")
    common(v)
    v.add_argument("--depth", choices=DEPTHS, default="geometry")
    v.add_argument("--group-bound", type=int, default=None)
    v.add_argument("--threads", type=_threads, default=1)

    e = sub.add_parser("export", help="write a named matrix")
    common(e)
    e.add_argument("--matrix", required=True, choices=MATRIX_NAMES)
    e.add_argument("--format", choices=FORMATS, default="alist")

    g = sub.add_parser("group-audit", help="class sizes, stabilizer counts and parity verdicts")
    common(g)
    g.add_argument("--group-bound", type=int, default=None)

    common(sub.add_parser("dump-geometry", help="points, lines, conic, polarity and classes as JSON"))
    return parser


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _field(q: int, irr):
    return field_for_order(q, irr)


# -- dims -------------------------------------------------------------------------

def dims_row(q: int, irr=None) -> dict:
    """One table row; construction errors are reported in the ``error`` column."""
    row = {k: "" for k in DIMS_FIELDS}
    row["q"] = q
    try:
        odd = prime_power(q)[0] != 2
    except FieldError:
        odd = False
    if not odd:
        row["error"] = "not an odd prime power"
        return row
    try:
        rep = dimension_report(build_geometry(_field(q, irr)), with_d=False)
    except FieldError as exc:
        row["error"] = str(exc)
        return row
    row.update({k: getattr(rep, k) for k in DIMS_FIELDS if k != "error"})
    return row


def dims_table(qs: Sequence[int], irr=None, threads: int = 1) -> list[dict]:
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(lambda q: dims_row(q, irr), qs))
    return [dims_row(q, irr) for q in qs]


def render_dims(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=DIMS_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (str(v).lower() if isinstance(v, bool) else v) for k, v in r.items()})
    return buf.getvalue()


# -- export -------------------------------------------------------------------------

def export_matrix(q: int, name: str, fmt: str, irr=None) -> str:
    geom = build_geometry(_field(q, irr))
    lm = build_matrix(geom, name)
    if name in ("B", "B0"):
        dense = lm.matrix.to_dense()
        if name == "B0":
            dense = dense.T
        if np.any(dense.sum(axis=1) != (q - 1) // 2) or np.any(dense.sum(axis=0) != (q + 1) // 2):
            raise ExportCheckFailed("B weights differ from (q-1)/2 per row and (q+1)/2 per column")
    return serialize(lm, fmt)


# -- group audit ----------------------------------------------------------------------

def group_audit(q: int, irr=None, bound: int | None = None) -> tuple[dict, bool]:
    geom = build_geometry(_field(q, irr))
    H = enumerate_H(geom.field, geom, bound)
    counts = [_class_counts(H, H.stabilizer(int(p))) for p in geom.I]
    uniform = all(c == counts[0] for c in counts)
    ids = ["Lemma_classes", "Cor_y11", "Lemma_m1", "Lemma_m2"]
    verdicts = run_suite(q, irr, depth="group", geom=geom, bound=bound, only=ids)
    report = {
        "q": q,
        "order_H": len(H),
        "class_sizes": H.class_sizes(),
        "stabilizer_intersections": counts[0],
        "stabilizer_intersections_uniform": uniform,
        "verdicts": [v.to_dict() for v in verdicts],
    }
    return report, all(v.passed for v in verdicts)


# -- geometry dump ------------------------------------------------------------------------

def dump_geometry(q: int, irr=None) -> str:
    geom = build_geometry(_field(q, irr))
    F = geom.field
    doc = {
        "q": q,
        "field": {"p": F.p, "e": F.e, "modulus": list(F.modulus), "xi": F.xi_value},
        "points": geom.coords.tolist(),
        "lines": geom.coords.tolist(),
        "conic": geom.conic.tolist(),
        "polarity": geom.polar_of_point.tolist(),
        "classes": {
            "points": [PointClass(c).name.lower() for c in geom.point_class],
            "lines": [LineClass(c).name.lower() for c in geom.line_class],
        },
    }
    return json.dumps(doc, sort_keys=True) + "\n"


# -- main ------------------------------------------------------------------------------

def run(cfg: RunConfig) -> int:
    """Execute one configuration; returns the process exit code."""
    if cfg.command == "dims":
        rows = dims_table(cfg.q, cfg.irr, cfg.threads)
        _emit(render_dims(rows, cfg.format), cfg.out)
        return EXIT_OK if all(r["error"] == "" and r["match"] for r in rows) else EXIT_FAILED
    (q,) = cfg.q
    if cfg.command == "verify":
        verdicts = run_suite(q, cfg.irr, depth=cfg.depth, bound=cfg.group_bound, threads=cfg.threads)
        _emit(verdicts_json(verdicts), cfg.out)
        return EXIT_OK if all(v.passed for v in verdicts) else EXIT_FAILED
    if cfg.command == "export":
        _emit(export_matrix(q, cfg.matrix, cfg.format, cfg.irr), cfg.out)
        return EXIT_OK
    if cfg.command == "group-audit":
        report, ok = group_audit(q, cfg.irr, cfg.group_bound)
        _emit(json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n", cfg.out)
        return EXIT_OK if ok else EXIT_FAILED
    _emit(dump_geometry(q, cfg.irr), cfg.out)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "dims":
        try:
            qs = q_values(args.q)
        except ValueError:
            parser.error(f"cannot parse q values {args.q}")
        if args.irr is not None and len(qs) != 1:
            parser.error("--irr needs exactly one q")
    else:
        qs = (args.q,)
    try:
        cfg = RunConfig.from_args(args, qs)
    except ValueError as exc:
        parser.error(str(exc))
    try:
        return run(cfg)
    except (FieldError, BoundExceeded, UnknownMatrix) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


__all__ = ["RunConfig", "main", "run", "dims_table", "export_matrix", "group_audit", "dump_geometry", "group_bound"]
