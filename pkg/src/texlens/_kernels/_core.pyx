# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: dense L2 distance matrices and the per-location
channel dispersion statistic. Mirrors fallback.py exactly in contract;
callers go through texlens._kernels which picks one at import."""

from libc.math cimport log, sqrt

import numpy as np


def pairwise_distances(const double[:, ::1] a, const double[:, ::1] b):
    """Euclidean distances between every row of ``a`` and every row of ``b``.

    Accumulates in float64. Returns an (m, n) float64 matrix.
    """
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t d = a.shape[1]
    if b.shape[1] != d:
        raise ValueError("vector length mismatch")
    out_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    with nogil:
        for i in range(m):
            for j in range(n):
                acc = 0.0
                for k in range(d):
                    diff = a[i, k] - b[j, k]
                    acc += diff * diff
                out[i, j] = sqrt(acc)
    return out_arr


def smoe_map(const double[:, :, ::1] x, double eps):
    """Per-location channel statistic over a (channels, h, w) block.

    At each location, with v_c = max(x_c, eps) and mu their channel mean,
    emits (1/C) * sum_c v_c * ln(v_c / mu). Locations whose channels are
    all equal score exactly zero whenever mu is computed exactly.
    """
    cdef Py_ssize_t c = x.shape[0]
    cdef Py_ssize_t h = x.shape[1]
    cdef Py_ssize_t w = x.shape[2]
    # Channel-major passes stream each (h, w) plane contiguously instead of
    # striding across channels at every location; the accumulation order over
    # channels is unchanged, so results match the per-location formulation
    # bit for bit.
    out_arr = np.zeros((h, w), dtype=np.float64)
    mu_arr = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[:, ::1] mu = mu_arr
    cdef Py_ssize_t i, j, k
    cdef double v
    with nogil:
        for k in range(c):
            for i in range(h):
                for j in range(w):
                    v = x[k, i, j]
                    if v < eps:
                        v = eps
                    mu[i, j] += v
        for i in range(h):
            for j in range(w):
                mu[i, j] /= c
        for k in range(c):
            for i in range(h):
                for j in range(w):
                    v = x[k, i, j]
                    if v < eps:
                        v = eps
                    out[i, j] += v * log(v / mu[i, j])
        for i in range(h):
            for j in range(w):
                out[i, j] /= c
    return out_arr
