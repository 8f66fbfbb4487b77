# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled residual/gradient kernels; same contract as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs

cnp.import_array()


cdef inline void _chain(double z, double* s, double* d1, double* d2, double* d3) noexcept nogil:
    cdef double e = exp(-fabs(z))
    cdef double sig
    if z >= 0.0:
        sig = 1.0 / (1.0 + e)
    else:
        sig = e / (1.0 + e)
    cdef double t = 1.0 - 2.0 * sig
    s[0] = sig
    d1[0] = sig * (1.0 - sig)
    d2[0] = d1[0] * t
    d3[0] = d1[0] * t * t - 2.0 * d1[0] * d1[0]


def forward(const double[::1] w1, const double[::1] w2, const double[::1] b, const double[::1] c,
            px, py, alpha):
    cdef const double[:, ::1] PX = np.ascontiguousarray(px, dtype=np.float64)
    cdef const double[:, ::1] PY = np.ascontiguousarray(py, dtype=np.float64)
    cdef const double[:, :, ::1] A = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef Py_ssize_t K = PX.shape[0], P = PX.shape[1], n = w1.shape[0]
    cdef Py_ssize_t k, p, j
    out_arr = np.zeros(P)
    cdef double[::1] out = out_arr
    cdef double s, d1, d2, d3, acc, z
    with nogil:
        for p in range(P):
            acc = 0.0
            for k in range(K):
                for j in range(n):
                    z = PX[k, p] * w1[j] + PY[k, p] * w2[j] + b[j]
                    _chain(z, &s, &d1, &d2, &d3)
                    acc = acc + c[j] * (A[k, 0, p] * s
                                        + (A[k, 1, p] * w1[j] + A[k, 2, p] * w2[j]) * d1
                                        + (A[k, 3, p] * w1[j] * w1[j] + A[k, 4, p] * w2[j] * w2[j]) * d2)
            out[p] = acc
    return out_arr


def backward(const double[::1] w1, const double[::1] w2, const double[::1] b, const double[::1] c,
             px, py, alpha, rbar):
    cdef const double[:, ::1] PX = np.ascontiguousarray(px, dtype=np.float64)
    cdef const double[:, ::1] PY = np.ascontiguousarray(py, dtype=np.float64)
    cdef const double[:, :, ::1] A = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef const double[::1] R = np.ascontiguousarray(rbar, dtype=np.float64)
    cdef Py_ssize_t K = PX.shape[0], P = PX.shape[1], n = w1.shape[0]
    cdef Py_ssize_t k, p, j
    g_arr = np.zeros((4, n))
    cdef double[:, ::1] G = g_arr
    cdef double s, d1, d2, d3, z, lin, quad, g, t, r
    with nogil:
        for j in range(n):
            for k in range(K):
                for p in range(P):
                    r = R[p]
                    z = PX[k, p] * w1[j] + PY[k, p] * w2[j] + b[j]
                    _chain(z, &s, &d1, &d2, &d3)
                    lin = A[k, 1, p] * w1[j] + A[k, 2, p] * w2[j]
                    quad = A[k, 3, p] * w1[j] * w1[j] + A[k, 4, p] * w2[j] * w2[j]
                    g = A[k, 0, p] * s + lin * d1 + quad * d2
                    t = A[k, 0, p] * d1 + lin * d2 + quad * d3
                    G[3, j] += r * g
                    G[2, j] += r * t
                    G[0, j] += r * (t * PX[k, p] + A[k, 1, p] * d1 + 2.0 * A[k, 3, p] * w1[j] * d2)
                    G[1, j] += r * (t * PY[k, p] + A[k, 2, p] * d1 + 2.0 * A[k, 4, p] * w2[j] * d2)
            G[0, j] *= c[j]
            G[1, j] *= c[j]
            G[2, j] *= c[j]
    return g_arr
