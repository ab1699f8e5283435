# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.

Two loops dominate runtime and resist vectorization: the renewal
convolution recursion (each u_n depends on all earlier terms) and the
per-column strip count for planar translation orbits.  The pure-Python
twins live in ``ergosum._pykernels``; ``ergosum.kernels`` selects a
backend at import time.
"""

from libc.math cimport ceil, floor

import numpy as np


def renewal_convolve(double[::1] mass, Py_ssize_t n_max):
    """Renewal recursion u_0 = 1, u_n = sum_{k=1..n} mass[k] * u[n-k].

    ``mass`` holds the lifetime masses with mass[0] ignored and must have
    length at least n_max + 1.  Returns (u, a_u) where a_u[n] = u_1 + ... + u_n
    is accumulated with Kahan compensation.
    """
    if mass.shape[0] < n_max + 1:
        raise ValueError("mass array shorter than n_max + 1")
    u_arr = np.empty(n_max + 1, dtype=np.float64)
    a_arr = np.empty(n_max + 1, dtype=np.float64)
    cdef double[::1] u = u_arr
    cdef double[::1] a = a_arr
    cdef Py_ssize_t n, k
    cdef double s, acc, comp, y, t
    u[0] = 1.0
    a[0] = 0.0
    acc = 0.0
    comp = 0.0
    for n in range(1, n_max + 1):
        s = 0.0
        for k in range(1, n + 1):
            s += mass[k] * u[n - k]
        u[n] = s
        y = s - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
        a[n] = acc
    return u_arr, a_arr


def translate_count(double alpha, double beta, double x, long long n_box):
    """#{(k,l) : |k|,|l| <= n_box, 0 <= x + k*alpha + l*beta < 1}.

    One pass over k; the admissible l form an integer interval intersected
    with [-n_box, n_box], so the count is O(n_box) instead of a 2-D scan.
    """
    cdef long long count = 0
    cdef long long k, l1, l2
    cdef double t, lo, hi
    if beta == 0.0:
        raise ValueError("beta must be nonzero")
    for k in range(-n_box, n_box + 1):
        t = x + k * alpha
        if beta > 0.0:
            lo = ceil(-t / beta)
            hi = ceil((1.0 - t) / beta) - 1.0
        else:
            lo = floor((1.0 - t) / beta) + 1.0
            hi = floor(-t / beta)
        if lo > <double> n_box or hi < <double> (-n_box):
            continue
        l1 = <long long> lo
        if l1 < -n_box:
            l1 = -n_box
        l2 = <long long> hi
        if l2 > n_box:
            l2 = n_box
        if l2 >= l1:
            count += l2 - l1 + 1
    return count
