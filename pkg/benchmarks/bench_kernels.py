#!/usr/bin/env python3
"""Benchmark the compiled clustering kernels against the pure NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--sizes 500,1000,2000]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ucal._kernels import _pure

try:
    from ucal._kernels import _core
except ImportError:
    _core = None


def unit_rows(n, dim, rng):
    x = rng.standard_normal((n, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def distance_matrix(n, rng):
    x = unit_rows(n, 32, rng)
    d = 1.0 - x @ x.T
    d = np.triu(d, 1)
    return np.ascontiguousarray(d + d.T)


def timed(fn, *args, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="250,500,1000,2000",
                        help="comma-separated point counts")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _core is None:
        print("compiled kernels unavailable; only the pure backend will run")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'n':>6}{'pure':>12}{'compiled':>12}{'speedup':>10}")
    for n in sizes:
        d = distance_matrix(n, rng)
        eps, min_pts = 0.35, 4
        t_pure, labels_pure = timed(_pure.dbscan_labels, d, eps, min_pts)
        if _core is not None:
            t_core, labels_core = timed(_core.dbscan_labels, d, eps, min_pts)
            assert np.array_equal(labels_pure, labels_core)
            print(f"{'dbscan_labels':<22}{n:>6}{t_pure:>11.4f}s{t_core:>11.4f}s"
                  f"{t_pure / t_core:>9.1f}x")
        else:
            print(f"{'dbscan_labels':<22}{n:>6}{t_pure:>11.4f}s{'-':>12}{'-':>10}")

    for n in sizes:
        d = distance_matrix(n, rng)
        k = max(2, n // 50)
        t_pure, res_pure = timed(_pure.kmedoids, d, k)
        if _core is not None:
            t_core, res_core = timed(_core.kmedoids, d, k)
            assert np.array_equal(res_pure[0], res_core[0])
            assert np.array_equal(res_pure[1], res_core[1])
            print(f"{'kmedoids (k=n/50)':<22}{n:>6}{t_pure:>11.4f}s{t_core:>11.4f}s"
                  f"{t_pure / t_core:>9.1f}x")
        else:
            print(f"{'kmedoids (k=n/50)':<22}{n:>6}{t_pure:>11.4f}s{'-':>12}{'-':>10}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
