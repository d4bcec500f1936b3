"""Time GF(2) elimination in the compiled core against the numpy fallback.

Usage: python3 benchmarks/bench_gf2.py [--q 27 49 81] [--random 512 1024] [--repeat 3]

For each workload both backends echelonize the same packed matrix; the pivot
lists are compared so a speedup never hides a wrong answer.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from conicrank import build_geometry, field_for_order
from conicrank.gf2mat import kernels, pack_rows
from conicrank.incidence import build_B


def _time(kernel, packed: np.ndarray, ncols: int, repeat: int) -> tuple[float, list[int]]:
    best, pivots = float("inf"), []
    for _ in range(repeat):
        work = packed.copy()
        t0 = time.perf_counter()
        pivots = kernel.echelonize(work, ncols, False)
        best = min(best, time.perf_counter() - t0)
    return best, np.asarray(pivots).tolist()


def workloads(qs, sizes):
    for q in qs:
        dense = build_B(build_geometry(field_for_order(q))).matrix.to_dense()
        yield f"B at q={q}", dense
    rng = np.random.default_rng(1)
    for n in sizes:
        yield f"random {n}x{n}", rng.integers(0, 2, size=(n, n), dtype=np.uint8)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=int, nargs="*", default=[27, 49, 81])
    ap.add_argument("--random", type=int, nargs="*", default=[512, 1024, 2048])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    try:
        compiled = kernels("cython")
    except ImportError:
        compiled = None
        print("compiled core not built; timing the numpy fallback only")
    fallback = kernels("numpy")

    print(f"{'workload':<18} {'shape':>11} {'rank':>6} {'numpy s':>9} {'cython s':>9} {'speedup':>8}")
    for name, dense in workloads(args.q, args.random):
        packed = pack_rows(dense)
        t_np, piv_np = _time(fallback, packed, dense.shape[1], args.repeat)
        if compiled is not None:
            t_cy, piv_cy = _time(compiled, packed, dense.shape[1], args.repeat)
            if piv_cy != piv_np:
                raise SystemExit(f"{name}: backends disagree")
            tail = f"{t_cy:9.4f} {t_np / t_cy:7.1f}x"
        else:
            tail = f"{'-':>9} {'-':>8}"
        shape = f"{dense.shape[0]}x{dense.shape[1]}"
        print(f"{name:<18} {shape:>11} {len(piv_np):6d} {t_np:9.4f} {tail}")


if __name__ == "__main__":
    main()
