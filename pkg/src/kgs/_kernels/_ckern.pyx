# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled edge/vertex kernels.

Same contract as ``numpy_backend``.  Scalar reductions fill a per-term
buffer and reduce it pairwise so rounding behaves like ``np.sum``.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef cnp.float64_t f64
ctypedef cnp.int64_t i64


cdef double _pairwise(const double* a, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, half
    cdef double s
    if n <= 8:
        s = 0.0
        for i in range(n):
            s += a[i]
        return s
    half = n // 2
    return _pairwise(a, half) + _pairwise(a + half, n - half)


def laplacian(const i64[::1] src, const i64[::1] dst, const f64[::1] w,
              const f64[::1] mu, const f64[::1] u):
    cdef Py_ssize_t m = src.shape[0]
    cdef Py_ssize_t n = mu.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    cdef f64[::1] out = out_arr
    cdef Py_ssize_t e
    cdef double t
    with nogil:
        for e in range(m):
            t = w[e] * (u[dst[e]] - u[src[e]])
            out[src[e]] += t
            out[dst[e]] -= t
        for e in range(n):
            out[e] /= mu[e]
    return out_arr


def gradient_form(const i64[::1] src, const i64[::1] dst, const f64[::1] w,
                  const f64[::1] mu, const f64[::1] u, const f64[::1] v):
    cdef Py_ssize_t m = src.shape[0]
    cdef Py_ssize_t n = mu.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    cdef f64[::1] out = out_arr
    cdef Py_ssize_t e
    cdef double t
    with nogil:
        for e in range(m):
            t = w[e] * (u[dst[e]] - u[src[e]]) * (v[dst[e]] - v[src[e]])
            out[src[e]] += t
            out[dst[e]] += t
        for e in range(n):
            out[e] = 0.5 * out[e] / mu[e]
    return out_arr


def stiffness_apply(const i64[::1] src, const i64[::1] dst, const f64[::1] w,
                    const f64[::1] u):
    cdef Py_ssize_t m = src.shape[0]
    cdef Py_ssize_t n = u.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    cdef f64[::1] out = out_arr
    cdef Py_ssize_t e
    cdef double t
    with nogil:
        for e in range(m):
            t = w[e] * (u[src[e]] - u[dst[e]])
            out[src[e]] += t
            out[dst[e]] -= t
    return out_arr


def edge_pairing(const i64[::1] src, const i64[::1] dst, const f64[::1] w,
                 const f64[::1] u, const f64[::1] v):
    cdef Py_ssize_t m = src.shape[0]
    buf_arr = np.empty(m, dtype=np.float64)
    cdef f64[::1] buf = buf_arr
    cdef Py_ssize_t e
    cdef double s
    with nogil:
        for e in range(m):
            buf[e] = w[e] * (u[dst[e]] - u[src[e]]) * (v[dst[e]] - v[src[e]])
        s = _pairwise(&buf[0], m) if m > 0 else 0.0
    return s


def edge_pairing_masked(const i64[::1] src, const i64[::1] dst, const f64[::1] w,
                        const f64[::1] u, const f64[::1] v, const f64[::1] factor):
    cdef Py_ssize_t m = src.shape[0]
    buf_arr = np.empty(m, dtype=np.float64)
    cdef f64[::1] buf = buf_arr
    cdef Py_ssize_t e
    cdef double s
    with nogil:
        for e in range(m):
            buf[e] = (w[e] * (u[dst[e]] - u[src[e]]) * (v[dst[e]] - v[src[e]])
                      * (0.5 * (factor[src[e]] + factor[dst[e]])))
        s = _pairwise(&buf[0], m) if m > 0 else 0.0
    return s


def mass_dot(const f64[::1] w, const f64[::1] x, const f64[::1] y):
    cdef Py_ssize_t n = w.shape[0]
    buf_arr = np.empty(n, dtype=np.float64)
    cdef f64[::1] buf = buf_arr
    cdef Py_ssize_t i
    cdef double s
    with nogil:
        for i in range(n):
            buf[i] = w[i] * x[i] * y[i]
        s = _pairwise(&buf[0], n) if n > 0 else 0.0
    return s


def mass_pow(const f64[::1] w, const f64[::1] x, int p):
    cdef Py_ssize_t n = w.shape[0]
    buf_arr = np.empty(n, dtype=np.float64)
    cdef f64[::1] buf = buf_arr
    cdef Py_ssize_t i
    cdef double s, t, t2
    with nogil:
        for i in range(n):
            t = x[i]
            if p == 1:
                buf[i] = w[i] * t
            elif p == 2:
                buf[i] = w[i] * (t * t)
            elif p == 3:
                t2 = t * t
                buf[i] = w[i] * (t2 * t)
            elif p == 4:
                t2 = t * t
                buf[i] = w[i] * (t2 * t2)
            else:
                buf[i] = w[i] * t ** p
        s = _pairwise(&buf[0], n) if n > 0 else 0.0
    return s


def mass_cubic_dot(const f64[::1] w, const f64[::1] x, const f64[::1] y):
    cdef Py_ssize_t n = w.shape[0]
    buf_arr = np.empty(n, dtype=np.float64)
    cdef f64[::1] buf = buf_arr
    cdef Py_ssize_t i
    cdef double t2
    cdef double s
    with nogil:
        for i in range(n):
            t2 = x[i] * x[i]
            buf[i] = w[i] * (t2 * x[i]) * y[i]
        s = _pairwise(&buf[0], n) if n > 0 else 0.0
    return s
