"""Compare the compiled and pure-Python simplex kernels on mini-city flow LPs.

Usage: python benchmarks/bench_simplex.py [--cells N] [--repeat R] [--grid]

Every stage-1 flow LP of the first N design cells is solved with each kernel.
The script checks that both kernels return the same status, iteration count
and solution vector, then prints the best-of-R wall time per kernel. With
--grid it also times a full design-grid sweep per kernel.
"""
import argparse
import sys
import time
from pathlib import Path

import numpy as np

from iamod_codesign.engine import evaluate_grid
from iamod_codesign.flow import build_flow_problem
from iamod_codesign.lp import available_kernels, solve_lp
from iamod_codesign.scenario import load_scenario

DEFAULT_SCENARIO = Path(__file__).resolve().parent.parent / "scenarios" / "mini_city" / "scenario.json"


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", type=Path, default=DEFAULT_SCENARIO)
    ap.add_argument("--cells", type=int, default=60, help="number of design cells (default 60)")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--grid", action="store_true", help="also time a full grid sweep per kernel")
    args = ap.parse_args(argv)

    kernels = available_kernels()
    if "cython" not in kernels:
        print("compiled kernel not built; only the Python kernel is available", file=sys.stderr)
    sc = load_scenario(args.scenario)
    designs = list(sc.grid)[: args.cells]
    lps = [build_flow_problem(sc.graph, sc.requests, d, sc.params).lp for d in designs]
    print(f"{len(lps)} LPs, {lps[0].n} variables, "
          f"{lps[0].A_eq.shape[0] + lps[0].A_ub.shape[0]} constraints each")

    results, timing = {}, {}
    for k in kernels:
        timing[k], results[k] = best_of(lambda: [solve_lp(lp, kernel=k) for lp in lps], args.repeat)

    ref = results[kernels[-1]]
    for k in kernels[:-1]:
        for a, b in zip(results[k], ref):
            same = a.status == b.status and a.iterations == b.iterations and (
                a.x is None or np.array_equal(a.x, b.x))
            if not same:
                print(f"MISMATCH between {k} and {kernels[-1]}", file=sys.stderr)
                return 1
    print("kernels agree on status, iterations and solutions")

    base = timing.get("python")
    for k in kernels:
        speedup = f"  ({base / timing[k]:.1f}x)" if base else ""
        print(f"  {k:7s} {timing[k]:8.3f} s  {1e3 * timing[k] / len(lps):7.2f} ms/LP{speedup}")

    if args.grid:
        for k in kernels:
            t, _ = best_of(lambda: evaluate_grid(sc, kernel=k), 1)
            print(f"  full grid ({len(sc.grid)} cells) with {k}: {t:.2f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
