# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops; see _fallback.py for the reference semantics."""
import numpy as np

cimport numpy as cnp
from libc.math cimport log, log1p, sqrt

cnp.import_array()


cdef extern from *:
    int __builtin_clzll(unsigned long long) nogil


cdef inline long long _block_of(long long n) nogil:
    # largest m with 2**(m*m) <= n
    cdef long long bits = 63 - __builtin_clzll(<unsigned long long>n)
    cdef long long m = <long long>sqrt(<double>bits)
    while m * m > bits:
        m -= 1
    while (m + 1) * (m + 1) <= bits:
        m += 1
    return m


cdef inline double _weight(long long k) nogil:
    cdef long long m = _block_of(k)
    cdef double x = <double>k
    if m * m < 63 and k == (<long long>1 << (m * m)):
        if m % 2 == 0:
            return 1.0 / log(x) + 1.0 / log1p(x)
        return -(1.0 / log(x) + 1.0 / log1p(x))
    if m % 2 == 1:
        return log1p(1.0 / x) / (log(x) * log1p(x))
    return -log1p(1.0 / x) / (log(x) * log1p(x))


def stream_block_sums(long long k_lo, long long k_hi, bint reverse=False):
    """Kahan-compensated (sum c_k, sum |c_k|) over k_lo <= k <= k_hi."""
    cdef double s = 0.0, cs = 0.0, a = 0.0, ca = 0.0
    cdef double w, y, t
    cdef long long k, step, start, stop
    if k_hi < k_lo:
        return 0.0, 0.0
    if reverse:
        start, stop, step = k_hi, k_lo - 1, -1
    else:
        start, stop, step = k_lo, k_hi + 1, 1
    with nogil:
        k = start
        while k != stop:
            w = _weight(k)
            y = w - cs
            t = s + y
            cs = (t - s) - y
            s = t
            if w < 0:
                w = -w
            y = w - ca
            t = a + y
            ca = (t - a) - y
            a = t
            k += step
    return s, a


def accumulate_paths(const long long[:] offsets, const double[:] times,
                     const double[:, :] contrib, const double[:] checkpoints,
                     const double[:] edges, const long long[:] labels, int n_labels):
    """Cumulative per-checkpoint, per-label sums of jump contributions.

    Path p owns jumps offsets[p]:offsets[p+1], sorted by time.  The label of
    time s is labels[j] with j the number of edges <= s.
    """
    cdef Py_ssize_t n_paths = offsets.shape[0] - 1
    cdef Py_ssize_t n_cp = checkpoints.shape[0]
    cdef Py_ssize_t d = contrib.shape[1]
    cdef Py_ssize_t n_edges = edges.shape[0]
    out_arr = np.zeros((n_paths, n_cp, n_labels, d), dtype=np.float64)
    cdef double[:, :, :, :] out = out_arr
    cdef Py_ssize_t p, i, c, e, q, lab
    cdef double s
    with nogil:
        for p in range(n_paths):
            c = 0
            e = 0
            for i in range(offsets[p], offsets[p + 1]):
                s = times[i]
                while c < n_cp and checkpoints[c] < s:
                    c += 1
                if c == n_cp:
                    break
                while e < n_edges and edges[e] <= s:
                    e += 1
                lab = labels[e]
                for q in range(d):
                    out[p, c, lab, q] += contrib[i, q]
            for c in range(1, n_cp):
                for lab in range(n_labels):
                    for q in range(d):
                        out[p, c, lab, q] += out[p, c - 1, lab, q]
    return out_arr
