# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; semantics identical to ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY, isfinite

cnp.import_array()


def coulomb_energy_grad(points):
    cdef double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = P.shape[0], i, j
    grad_arr = np.zeros((n, 3), dtype=np.float64)
    cdef double[:, ::1] G = grad_arr
    cdef double dx, dy, dz, r2, r, inv, inv3, energy = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            dx = P[i, 0] - P[j, 0]
            dy = P[i, 1] - P[j, 1]
            dz = P[i, 2] - P[j, 2]
            r2 = dx * dx + dy * dy + dz * dz
            r = sqrt(r2)
            inv = 1.0 / r
            energy += inv
            inv3 = inv / r2
            G[i, 0] -= dx * inv3
            G[i, 1] -= dy * inv3
            G[i, 2] -= dz * inv3
            G[j, 0] += dx * inv3
            G[j, 1] += dy * inv3
            G[j, 2] += dz * inv3
    return energy, grad_arr


def intersection_counts(a, b):
    cdef unsigned char[:, ::1] A = np.ascontiguousarray(a, dtype=np.uint8)
    cdef unsigned char[:, ::1] B = np.ascontiguousarray(b, dtype=np.uint8)
    cdef Py_ssize_t k = A.shape[0], m = B.shape[0], n = A.shape[1], i, j, t
    out_arr = np.zeros((k, m), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr
    cdef cnp.int64_t c
    for i in range(k):
        for j in range(m):
            c = 0
            for t in range(n):
                c += A[i, t] & B[j, t]
            out[i, j] = c
    return out_arr


def tet_circumradii(points, tets):
    cdef double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.int64_t[:, ::1] T = np.ascontiguousarray(tets, dtype=np.int64)
    cdef Py_ssize_t m = T.shape[0], t, k
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double u[3]
    cdef double v[3]
    cdef double w[3]
    cdef double uv[3]
    cdef double wu[3]
    cdef double vw[3]
    cdef double uu, vv, ww, den, nx, ny, nz, r
    for t in range(m):
        for k in range(3):
            u[k] = P[T[t, 1], k] - P[T[t, 0], k]
            v[k] = P[T[t, 2], k] - P[T[t, 0], k]
            w[k] = P[T[t, 3], k] - P[T[t, 0], k]
        uv[0] = u[1] * v[2] - u[2] * v[1]
        uv[1] = u[2] * v[0] - u[0] * v[2]
        uv[2] = u[0] * v[1] - u[1] * v[0]
        wu[0] = w[1] * u[2] - w[2] * u[1]
        wu[1] = w[2] * u[0] - w[0] * u[2]
        wu[2] = w[0] * u[1] - w[1] * u[0]
        vw[0] = v[1] * w[2] - v[2] * w[1]
        vw[1] = v[2] * w[0] - v[0] * w[2]
        vw[2] = v[0] * w[1] - v[1] * w[0]
        uu = u[0] * u[0] + u[1] * u[1] + u[2] * u[2]
        vv = v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
        ww = w[0] * w[0] + w[1] * w[1] + w[2] * w[2]
        den = 2.0 * (u[0] * vw[0] + u[1] * vw[1] + u[2] * vw[2])
        nx = ww * uv[0] + vv * wu[0] + uu * vw[0]
        ny = ww * uv[1] + vv * wu[1] + uu * vw[1]
        nz = ww * uv[2] + vv * wu[2] + uu * vw[2]
        if den == 0.0:
            out[t] = INFINITY
        else:
            r = sqrt(nx * nx + ny * ny + nz * nz) / fabs(den)
            out[t] = r if isfinite(r) else INFINITY
    return out_arr
