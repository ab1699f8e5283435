#!/usr/bin/env python3
"""Benchmark the compiled kernels against their pure-Python twins.

Usage: python benchmarks/bench_kernels.py [--quick]

The two hot loops are the renewal convolution recursion (sequential data
dependence, quadratic work) and the per-column strip count for planar
translation orbits (linear, but 2N+1 iterations).  Everything else in the
package is NumPy-bound or big-integer-bound and gains little from
compilation.
"""

import argparse
import math
import time

import numpy as np

from ergosum import _pykernels
from ergosum.kernels import BACKEND

try:
    from ergosum import _ext
except ImportError:
    _ext = None


def timeit(fn, repeats=3):
    best = math.inf
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def bench_renewal(n_max):
    mass = np.zeros(n_max + 1)
    mass[1:] = 0.5 ** np.arange(1, n_max + 1)
    rows = []
    py_t, (py_u, _) = timeit(lambda: _pykernels.renewal_convolve(mass, n_max))
    rows.append(("python", py_t, py_u))
    if _ext is not None:
        c_t, (c_u, _) = timeit(lambda: _ext.renewal_convolve(mass, n_max))
        rows.append(("compiled", c_t, c_u))
        assert float(np.max(np.abs(c_u - py_u))) < 1e-12
    return rows


def bench_translate(n_box):
    alpha = (1.0 + math.sqrt(5.0)) / 2.0
    rows = []
    py_t, py_count = timeit(lambda: _pykernels.translate_count(alpha, 1.0, 0.3, n_box))
    rows.append(("python", py_t, py_count))
    if _ext is not None:
        c_t, c_count = timeit(lambda: _ext.translate_count(alpha, 1.0, 0.3, n_box))
        rows.append(("compiled", c_t, c_count))
        assert c_count == py_count
    return rows


def print_table(title, rows, unit):
    print(f"\n{title}")
    base = rows[0][1]
    for backend, elapsed, value in rows:
        speedup = base / elapsed if elapsed else float("inf")
        print(f"  {backend:>9}: {elapsed * 1e3:9.2f} ms"
              f"  ({speedup:5.1f}x vs python)  [{unit}={value if unit == 'count' else 'ok'}]")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="smaller problem sizes")
    args = parser.parse_args()
    n_conv = 4000 if args.quick else 20000
    n_box = 10 ** 5 if args.quick else 2 * 10 ** 6

    print(f"active backend: {BACKEND}"
          + ("" if _ext is not None else "  (compiled extension not built)"))
    print_table(f"renewal convolution recursion, n_max = {n_conv}",
                bench_renewal(n_conv), unit="u")
    print_table(f"translation strip count, box radius N = {n_box}",
                bench_translate(n_box), unit="count")


if __name__ == "__main__":
    main()
