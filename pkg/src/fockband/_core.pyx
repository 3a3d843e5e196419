# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# cython: language_level=3
"""Compiled kernels for the secular function of the three-particle fibers.

Each row ``i`` describes one fiber: ``w2[i]`` is the one-level energy,
``w3[i, :]`` the continuum energies at the quadrature nodes and ``vw`` the
weighted squared coupling ``weight * v3(t)**2``.
"""

import numpy as np


def delta3_many(const double[::1] w2, const double[:, ::1] w3, const double[::1] vw,
                const double[::1] z):
    cdef Py_ssize_t m = w3.shape[0], k = w3.shape[1], i, j
    cdef double acc, zi
    out = np.empty(m)
    cdef double[::1] o = out
    with nogil:
        for i in range(m):
            zi = z[i]
            acc = 0.0
            for j in range(k):
                acc = acc + vw[j] / (w3[i, j] - zi)
            o[i] = w2[i] - zi - acc
    return out


def bisect_delta3(const double[::1] w2, const double[:, ::1] w3, const double[::1] vw,
                  const double[::1] lo, const double[::1] hi, double tol, int maxiter):
    """Root of the decreasing secular function in ``[lo[i], hi[i]]`` per row.

    Assumes a sign change ``f(lo) > 0 >= f(hi)``.
    """
    cdef Py_ssize_t m = w3.shape[0], k = w3.shape[1], i, j
    cdef int it
    cdef double a, b, mid, acc
    out = np.empty(m)
    cdef double[::1] o = out
    with nogil:
        for i in range(m):
            a = lo[i]
            b = hi[i]
            for it in range(maxiter):
                if b - a <= tol:
                    break
                mid = 0.5 * (a + b)
                if mid <= a or mid >= b:
                    break
                acc = 0.0
                for j in range(k):
                    acc = acc + vw[j] / (w3[i, j] - mid)
                if w2[i] - mid - acc > 0.0:
                    a = mid
                else:
                    b = mid
            o[i] = 0.5 * (a + b)
    return out
