"""Pure-Python/NumPy twins of the compiled kernels in ``ergosum._ext``.

Semantics match the compiled versions; the floating-point expressions are
identical term by term, so ``translate_count`` agrees exactly and
``renewal_convolve`` agrees to summation-order roundoff (~1e-15).
"""

from __future__ import annotations

import numpy as np


def renewal_convolve(mass, n_max):
    """Renewal recursion via per-step dot products; see _ext.renewal_convolve."""
    mass = np.ascontiguousarray(mass, dtype=np.float64)
    if mass.shape[0] < n_max + 1:
        raise ValueError("mass array shorter than n_max + 1")
    u = np.empty(n_max + 1, dtype=np.float64)
    u[0] = 1.0
    for n in range(1, n_max + 1):
        u[n] = np.dot(mass[1 : n + 1], u[n - 1 :: -1])
    a = np.empty(n_max + 1, dtype=np.float64)
    a[0] = 0.0
    if n_max:
        # 80-bit accumulation stands in for the compiled kernel's Kahan sum
        a[1:] = np.cumsum(u[1:], dtype=np.longdouble).astype(np.float64)
    return u, a


def translate_count(alpha, beta, x, n_box, chunk=1 << 20):
    """Strip-intersection count; see _ext.translate_count."""
    if beta == 0.0:
        raise ValueError("beta must be nonzero")
    alpha = float(alpha)
    beta = float(beta)
    x = float(x)
    n_box = int(n_box)
    total = 0
    for start in range(-n_box, n_box + 1, chunk):
        stop = min(start + chunk, n_box + 1)
        ks = np.arange(start, stop, dtype=np.float64)
        t = x + ks * alpha
        if beta > 0.0:
            lo = np.ceil(-t / beta)
            hi = np.ceil((1.0 - t) / beta) - 1.0
        else:
            lo = np.floor((1.0 - t) / beta) + 1.0
            hi = np.floor(-t / beta)
        np.clip(lo, -n_box, None, out=lo)
        np.clip(hi, None, n_box, out=hi)
        w = hi - lo + 1.0
        total += int(w[w > 0.0].sum())
    return total
