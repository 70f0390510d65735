#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Each kernel runs on a fixed-seed synthetic workload sized like a real
evaluation sweep (hundreds of clusters / thousands of tokens); the table
reports best-of-N wall times and the speedup factor.
"""

import argparse
import random
import time

from coreftk._kernels import pure

try:
    from coreftk._kernels import _speedups
except ImportError:
    _speedups = None


def bench(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def workloads(rng):
    n = 150
    square = [[rng.random() for _ in range(n)] for _ in range(n)]

    agg_n = 220
    sim = [[0.0] * agg_n for _ in range(agg_n)]
    for i in range(agg_n):
        for j in range(i + 1, agg_n):
            sim[i][j] = sim[j][i] = rng.random()

    tokens = [rng.randrange(400) for _ in range(200_000)]

    uf_n = 100_000
    edges = [(rng.randrange(uf_n), rng.randrange(uf_n)) for _ in range(150_000)]

    return [
        ("assignment_max (150x150)",
         lambda impl: impl.assignment_max(square)),
        ("agglomerate (n=220, avg, tau=0.6)",
         lambda impl: impl.agglomerate(sim, 0.6, pure.LINKAGE_AVERAGE)),
        ("mtld_factor_count (200k tokens)",
         lambda impl: impl.mtld_factor_count(tokens, 0.72)),
        ("union_find (100k nodes, 150k edges)",
         lambda impl: impl.union_find_components(uf_n, edges)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if _speedups is None:
        print("compiled kernels not built; showing pure backend only\n")

    rng = random.Random(7)
    header = f"{'kernel':<38} {'pure':>10} {'cython':>10} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, call in workloads(rng):
        t_pure, r_pure = bench(lambda: call(pure), args.repeats)
        if _speedups is None:
            print(f"{name:<38} {t_pure:>9.4f}s {'-':>10} {'-':>9}")
            continue
        t_fast, r_fast = bench(lambda: call(_speedups), args.repeats)
        assert r_pure == r_fast, f"backend mismatch in {name}"
        print(f"{name:<38} {t_pure:>9.4f}s {t_fast:>9.4f}s "
              f"{t_pure / t_fast:>8.1f}x")


if __name__ == "__main__":
    main()
