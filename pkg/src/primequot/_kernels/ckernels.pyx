# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for the segmented sieve and the almost-increasing scan."""

import numpy as np

cimport cython
from libc.stdint cimport int64_t, uint8_t


def mark_composites(flags, long long lo, base_primes):
    """Clear composite positions in ``flags`` covering [lo, lo+len(flags))."""
    cdef uint8_t[::1] f = flags.view(np.uint8)
    cdef int64_t[::1] bp = np.ascontiguousarray(base_primes, dtype=np.int64)
    cdef long long n = f.shape[0]
    cdef long long hi = lo + n
    cdef long long p, start, j
    cdef Py_ssize_t i
    for i in range(bp.shape[0]):
        p = bp[i]
        if p * p >= hi:
            break
        start = p * p
        if start < lo:
            start = ((lo + p - 1) / p) * p
        for j in range(start - lo, n, p):
            f[j] = 0


def max_drop(values):
    """Worst pair (i <= j) maximizing values[i] - values[j]; returns (drop, i, j)."""
    cdef int64_t[::1] v = np.ascontiguousarray(values, dtype=np.int64)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t idx, best_i, best_j, min_j
    cdef int64_t mn, drop, best
    if n == 0:
        raise ValueError("empty sequence")
    mn = v[n - 1]
    min_j = n - 1
    best = 0
    best_i = best_j = n - 1
    for idx in range(n - 2, -1, -1):
        if v[idx] <= mn:
            mn = v[idx]
            min_j = idx
        drop = v[idx] - mn
        if drop >= best:
            best = drop
            best_i = idx
            best_j = min_j
    return int(best), int(best_i), int(best_j)
