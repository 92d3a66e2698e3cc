# Element-local assembly kernels (compiled core).
#
# Mirrors smrom._kernels_py; the convection kernel is the hot path, being
# rebuilt at every time step (and every Picard sweep) of the full-order
# solver.

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def mass_p2_local(double[:, ::1] p2_vals, double[:, ::1] detw):
    cdef Py_ssize_t nel = detw.shape[0]
    cdef Py_ssize_t nq = detw.shape[1]
    out = np.zeros((nel, 6, 6))
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t e, q, i, j
    cdef double w, wi
    for e in range(nel):
        for q in range(nq):
            w = detw[e, q]
            for i in range(6):
                wi = w * p2_vals[q, i]
                for j in range(6):
                    o[e, i, j] += wi * p2_vals[q, j]
    return out


def stiffness_p2_local(double[:, :, :, ::1] p2_grads, double[:, ::1] detw):
    cdef Py_ssize_t nel = detw.shape[0]
    cdef Py_ssize_t nq = detw.shape[1]
    out = np.zeros((nel, 6, 6))
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t e, q, i, j
    cdef double w, gx, gy
    for e in range(nel):
        for q in range(nq):
            w = detw[e, q]
            for i in range(6):
                gx = w * p2_grads[e, q, i, 0]
                gy = w * p2_grads[e, q, i, 1]
                for j in range(6):
                    o[e, i, j] += gx * p2_grads[e, q, j, 0] + gy * p2_grads[e, q, j, 1]
    return out


def graddiv_local(double[:, :, :, ::1] p2_grads, double[:, ::1] detw):
    cdef Py_ssize_t nel = detw.shape[0]
    cdef Py_ssize_t nq = detw.shape[1]
    out = np.zeros((nel, 12, 12))
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t e, q, i, j, a, b
    cdef double w
    for e in range(nel):
        for q in range(nq):
            w = detw[e, q]
            for i in range(6):
                for a in range(2):
                    for j in range(6):
                        for b in range(2):
                            o[e, 2 * i + a, 2 * j + b] += (
                                w * p2_grads[e, q, i, a] * p2_grads[e, q, j, b])
    return out


def divergence_local(double[:, ::1] p1_vals, double[:, :, :, ::1] p2_grads,
                     double[:, ::1] detw):
    cdef Py_ssize_t nel = detw.shape[0]
    cdef Py_ssize_t nq = detw.shape[1]
    out = np.zeros((nel, 3, 12))
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t e, q, i, j, c
    cdef double w, wp
    for e in range(nel):
        for q in range(nq):
            w = detw[e, q]
            for i in range(3):
                wp = w * p1_vals[q, i]
                for j in range(6):
                    for c in range(2):
                        o[e, i, 2 * j + c] += wp * p2_grads[e, q, j, c]
    return out


def convection_local(double[:, :, ::1] wq, double[:, ::1] p2_vals,
                     double[:, :, :, ::1] p2_grads, double[:, ::1] detw):
    cdef Py_ssize_t nel = detw.shape[0]
    cdef Py_ssize_t nq = detw.shape[1]
    out = np.zeros((nel, 6, 6))
    cdef double[:, :, ::1] o = out
    cdef double wg[6]
    cdef Py_ssize_t e, q, i, j
    cdef double w, wx, wy, tij
    for e in range(nel):
        for q in range(nq):
            w = detw[e, q]
            wx = wq[e, q, 0]
            wy = wq[e, q, 1]
            for j in range(6):
                wg[j] = wx * p2_grads[e, q, j, 0] + wy * p2_grads[e, q, j, 1]
            for i in range(6):
                for j in range(6):
                    # 0.5 [ (w.grad N_j) N_i - (w.grad N_i) N_j ]
                    tij = 0.5 * w * (wg[j] * p2_vals[q, i] - wg[i] * p2_vals[q, j])
                    o[e, i, j] += tij
    return out


def p1_stiffness_local(double[:, :, ::1] p1_grads, double[::1] areas,
                       double[::1] coef):
    cdef Py_ssize_t nel = areas.shape[0]
    out = np.zeros((nel, 3, 3))
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t e, i, j
    cdef double s
    for e in range(nel):
        s = coef[e] * areas[e]
        for i in range(3):
            for j in range(3):
                o[e, i, j] = s * (p1_grads[e, i, 0] * p1_grads[e, j, 0]
                                  + p1_grads[e, i, 1] * p1_grads[e, j, 1])
    return out
