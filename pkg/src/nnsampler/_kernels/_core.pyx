# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled KDE kernels; the hot inner loops of training.

Serial by design: the call sites issue many small kernels, where thread
pool handoffs cost more than they save.  Results are bit-deterministic.
"""

import numpy as np

from libc.math cimport exp, sqrt

cdef double _SQRT_2PI = sqrt(2.0 * 3.14159265358979323846)


def kde_values(double[::1] samples, double h, double[::1] grid_points):
    cdef Py_ssize_t m = samples.shape[0]
    cdef Py_ssize_t n_grid = grid_points.shape[0]
    out = np.empty(n_grid, dtype=np.float64)
    cdef double[::1] o = out
    cdef double inv_2h2 = 1.0 / (2.0 * h * h)
    cdef double norm = 1.0 / (m * h * _SQRT_2PI)
    cdef Py_ssize_t g, j
    cdef double acc, d, t
    with nogil:
        for g in range(n_grid):
            acc = 0.0
            for j in range(m):
                d = grid_points[g] - samples[j]
                t = d * d * inv_2h2
                # Flush sub-normal-range terms to zero (exp(-700) ~ 1e-304);
                # avoids denormal stalls when the bandwidth is tiny.
                if t < 700.0:
                    acc = acc + exp(-t)
            o[g] = acc * norm
    return out


def kde_sample_grad(
    double[::1] samples,
    double h,
    double[::1] grid_points,
    double[::1] upstream,
):
    cdef Py_ssize_t m = samples.shape[0]
    cdef Py_ssize_t n_grid = grid_points.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef double inv_2h2 = 1.0 / (2.0 * h * h)
    cdef double norm = 1.0 / (m * h * h * h * _SQRT_2PI)
    cdef Py_ssize_t g, j
    cdef double acc, d, t
    with nogil:
        for j in range(m):
            acc = 0.0
            for g in range(n_grid):
                d = grid_points[g] - samples[j]
                t = d * d * inv_2h2
                if t < 700.0:
                    acc = acc + upstream[g] * d * exp(-t)
            o[j] = acc * norm
    return out
