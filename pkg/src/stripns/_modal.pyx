# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled RK4 loop and convection contraction for the modal system."""

import numpy as np
cimport numpy as cnp
from libc.math cimport isfinite

cnp.import_array()


cdef void _conv(const double[::1] g, const double[:, :, ::1] B, double[::1] out, double[:] tmp) noexcept nogil:
    # innermost index is contiguous in B
    cdef Py_ssize_t m = g.shape[0]
    cdef Py_ssize_t j, k, l
    cdef double c
    for l in range(m):
        out[l] = 0.0
    for j in range(m):
        for k in range(m):
            c = g[j] * g[k]
            for l in range(m):
                out[l] += c * B[j, k, l]


cdef void _rhs(const double[::1] g, const double[:, ::1] A, const double[:, :, ::1] B,
               const double[::1] f, double[::1] out, double[::1] conv, double[::1] tmp) noexcept nogil:
    cdef Py_ssize_t m = g.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc
    _conv(g, B, conv, tmp)
    for i in range(m):
        acc = 0.0
        for j in range(m):
            acc += A[i, j] * g[j]
        out[i] = acc - conv[i] + f[i]


def convection(g, B):
    cdef double[::1] gv = np.ascontiguousarray(g, dtype=np.float64)
    cdef double[:, :, ::1] Bv = np.ascontiguousarray(B, dtype=np.float64)
    m = gv.shape[0]
    out = np.zeros(m)
    tmp = np.zeros(m)
    cdef double[::1] ov = out
    cdef double[::1] tv = tmp
    with nogil:
        _conv(gv, Bv, ov, tv)
    return out


def rk4_integrate(g0, A, B, loads, double dt, Py_ssize_t nsteps):
    cdef double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[:, :, ::1] Bv = np.ascontiguousarray(B, dtype=np.float64)
    cdef double[:, ::1] Fv = np.ascontiguousarray(loads, dtype=np.float64)
    cdef Py_ssize_t m = Av.shape[0]
    traj_arr = np.zeros((nsteps + 1, m))
    cdef double[:, ::1] traj = traj_arr
    cdef double[::1] g = np.array(g0, dtype=np.float64)
    cdef double[::1] y = np.zeros(m)
    cdef double[::1] k1 = np.zeros(m)
    cdef double[::1] k2 = np.zeros(m)
    cdef double[::1] k3 = np.zeros(m)
    cdef double[::1] k4 = np.zeros(m)
    cdef double[::1] conv = np.zeros(m)
    cdef double[::1] tmp = np.zeros(m)
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0
    cdef Py_ssize_t n, i, bad = -1
    cdef bint ok
    with nogil:
        for i in range(m):
            traj[0, i] = g[i]
        for n in range(nsteps):
            _rhs(g, Av, Bv, Fv[2 * n], k1, conv, tmp)
            for i in range(m):
                y[i] = g[i] + half * k1[i]
            _rhs(y, Av, Bv, Fv[2 * n + 1], k2, conv, tmp)
            for i in range(m):
                y[i] = g[i] + half * k2[i]
            _rhs(y, Av, Bv, Fv[2 * n + 1], k3, conv, tmp)
            for i in range(m):
                y[i] = g[i] + dt * k3[i]
            _rhs(y, Av, Bv, Fv[2 * n + 2], k4, conv, tmp)
            ok = True
            for i in range(m):
                g[i] = g[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                if not isfinite(g[i]):
                    ok = False
            if not ok:
                bad = n + 1
                break
            for i in range(m):
                traj[n + 1, i] = g[i]
    if bad >= 0:
        traj_arr[bad:] = np.nan
    return traj_arr, int(bad)
