# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled RBF kernels; same signatures and semantics as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def rbf_cross(const double[:, ::1] X1, const double[:, ::1] X2, double alpha, const double[::1] inv_ell):
    cdef Py_ssize_t n1 = X1.shape[0], n2 = X2.shape[0], d = X1.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double s, t, a2 = alpha * alpha
    out = np.empty((n1, n2))
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(n1):
            for j in range(n2):
                s = 0.0
                for k in range(d):
                    t = (X1[i, k] - X2[j, k]) * inv_ell[k]
                    s = s + t * t
                o[i, j] = a2 * exp(-0.5 * s)
    return out


def mc_accumulate(const double[:, ::1] xi, const double[:, ::1] eta, const double[:, ::1] U,
                  double alpha, const double[::1] inv_ell):
    cdef Py_ssize_t m = xi.shape[0], d = xi.shape[1], N = U.shape[0]
    cdef Py_ssize_t j, i, l, k
    cdef double s, t, u, a, a2 = alpha * alpha
    cdef double s_k2 = 0.0, ss_k2 = 0.0
    s_q_a = np.zeros(N)
    ss_q_a = np.zeros(N)
    s_Q_a = np.zeros((N, N))
    ss_Q_a = np.zeros((N, N))
    s_R_a = np.zeros((d, N))
    ss_R_a = np.zeros((d, N))
    kp_a = np.empty(N)
    km_a = np.empty(N)
    cdef double[::1] s_q = s_q_a, ss_q = ss_q_a, kp = kp_a, km = km_a
    cdef double[:, ::1] s_Q = s_Q_a, ss_Q = ss_Q_a, s_R = s_R_a, ss_R = ss_R_a
    with nogil:
        for j in range(m):
            for i in range(N):
                s = 0.0
                u = 0.0
                for k in range(d):
                    t = (xi[j, k] - U[i, k]) * inv_ell[k]
                    s = s + t * t
                    t = (-xi[j, k] - U[i, k]) * inv_ell[k]
                    u = u + t * t
                kp[i] = a2 * exp(-0.5 * s)
                km[i] = a2 * exp(-0.5 * u)
            for i in range(N):
                a = 0.5 * (kp[i] + km[i])
                s_q[i] += a
                ss_q[i] += a * a
                for l in range(N):
                    a = 0.5 * (kp[i] * kp[l] + km[i] * km[l])
                    s_Q[i, l] += a
                    ss_Q[i, l] += a * a
                for k in range(d):
                    a = 0.5 * xi[j, k] * (kp[i] - km[i])
                    s_R[k, i] += a
                    ss_R[k, i] += a * a
            s = 0.0
            u = 0.0
            for k in range(d):
                t = (xi[j, k] - eta[j, k]) * inv_ell[k]
                s = s + t * t
                t = (-xi[j, k] - eta[j, k]) * inv_ell[k]
                u = u + t * t
            a = 0.5 * a2 * (exp(-0.5 * s) + exp(-0.5 * u))
            s_k2 += a
            ss_k2 += a * a
    return s_q_a, ss_q_a, s_Q_a, ss_Q_a, s_R_a, ss_R_a, s_k2, ss_k2
