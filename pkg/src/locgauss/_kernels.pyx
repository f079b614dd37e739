# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Same signatures and arithmetic order as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, fabs, M_PI

cnp.import_array()


def cir_full_truncation(double v0, double kappa, double theta, double xi,
                        double dt, z):
    cdef const double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t m = zv.shape[0], i
    out = np.empty(m + 1)
    cdef double[::1] o = out
    cdef double sq_dt = sqrt(dt)
    cdef double v = v0, vp
    o[0] = v
    with nogil:
        for i in range(m):
            vp = v if v > 0.0 else 0.0
            v = v + kappa * (theta - vp) * dt + xi * sqrt(vp) * sq_dt * zv[i]
            o[i + 1] = v
    return out


def bipower_leave_out(blocks, double n):
    arr = np.ascontiguousarray(blocks, dtype=np.float64)
    cdef Py_ssize_t rows = arr.shape[0], nb = arr.shape[1], k = arr.shape[2]
    cdef const double[:, :, ::1] x = arr
    per_block = np.empty((rows, nb))
    leave_out = np.empty((rows, nb, k))
    cdef double[:, ::1] pb = per_block
    cdef double[:, :, ::1] lo = leave_out
    cdef double c1 = (M_PI / 2.0) * (n / (k - 1))
    cdef double c2 = (k - 1.0) / (k - 3.0)
    cdef double c3 = (M_PI / 2.0) * (n / (k - 3))
    cdef double s, v, pl, pr, val
    cdef Py_ssize_t r, j, i
    cdef long floored = 0
    with nogil:
        for r in range(rows):
            for j in range(nb):
                s = 0.0
                for i in range(1, k):
                    s = s + fabs(x[r, j, i - 1]) * fabs(x[r, j, i])
                v = c1 * s
                pb[r, j] = v
                for i in range(k):
                    pl = fabs(x[r, j, i - 1]) * fabs(x[r, j, i]) if i > 0 else 0.0
                    pr = fabs(x[r, j, i]) * fabs(x[r, j, i + 1]) if i < k - 1 else 0.0
                    val = c2 * v - c3 * (pl + pr)
                    if val < 0.0:
                        val = 0.0
                        floored += 1
                    lo[r, j, i] = val
    return per_block, leave_out, int(floored)


def sup_limit(z, zeta, unif, sq_du, u, double w1_scale, shape, bias,
              cell_left, cell_du):
    cdef const double[:, ::1] zz = np.ascontiguousarray(z, dtype=np.float64)
    cdef const double[::1] ze = np.ascontiguousarray(zeta, dtype=np.float64)
    cdef const double[:, :, ::1] un = np.ascontiguousarray(unif, dtype=np.float64)
    cdef const double[::1] sq = np.ascontiguousarray(sq_du, dtype=np.float64)
    cdef const double[::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] sh = np.ascontiguousarray(shape, dtype=np.float64)
    cdef const double[::1] bi = np.ascontiguousarray(bias, dtype=np.float64)
    cdef const cnp.int64_t[::1] cl = np.ascontiguousarray(cell_left, dtype=np.int64)
    cdef const double[::1] cd = np.ascontiguousarray(cell_du, dtype=np.float64)
    cdef Py_ssize_t reps = zz.shape[0], g = uu.shape[0], nc = cl.shape[0]
    cdef Py_ssize_t r, i, c
    out = np.empty(reps)
    cdef double[::1] o = out
    ybuf = np.empty(g)
    cdef double[::1] y = ybuf
    cdef double w, w1, yk, best, a, b, d2, two_du, hi, lo
    with nogil:
        for r in range(reps):
            w = 0.0
            for i in range(g):
                w = w + zz[r, i] * sq[i]
                y[i] = w
            w1 = w + zz[r, g] * w1_scale
            best = 0.0
            for i in range(g):
                yk = y[i] - uu[i] * w1
                yk = yk + ze[r] * sh[i] + bi[i]
                y[i] = yk
                if fabs(yk) > best:
                    best = fabs(yk)
            for c in range(nc):
                a = y[cl[c]]
                b = y[cl[c] + 1]
                d2 = (b - a) * (b - a)
                two_du = 2.0 * cd[c]
                hi = (a + b + sqrt(d2 - two_du * log(1.0 - un[r, c, 0]))) * 0.5
                lo = (-a - b + sqrt(d2 - two_du * log(1.0 - un[r, c, 1]))) * 0.5
                if hi > best:
                    best = hi
                if lo > best:
                    best = lo
            o[r] = best
    return out
