# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trigonometric-sum kernels; same signatures as ``_pykernels``.

Grid evaluation advances each frequency by complex rotation and re-anchors
with direct cos/sin every ``_ANCHOR`` steps, which keeps the drift at the
level of a few ulps while avoiding a libm call per (point, frequency).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, M_PI

cnp.import_array()

cdef int _ANCHOR = 64
cdef double TWO_PI = 2.0 * M_PI


def grid_values(freqs, cre, cim, double scale, double L, Py_ssize_t n_cells):
    cdef double[::1] d = np.ascontiguousarray(freqs, dtype=np.float64)
    cdef double[:, ::1] ar = np.ascontiguousarray(np.atleast_2d(cre), dtype=np.float64)
    cdef double[:, ::1] ai = np.ascontiguousarray(np.atleast_2d(cim), dtype=np.float64)
    cdef Py_ssize_t R = ar.shape[0], K = d.shape[0], npts = n_cells + 1
    out_arr = np.empty((R, npts), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double h = L / n_cells
    cdef double[::1] rc = np.empty(K), rs = np.empty(K)
    cdef double[::1] c = np.empty(K), s = np.empty(K)
    cdef Py_ssize_t r, k, i
    cdef double tmp, acc, t
    for k in range(K):
        rc[k] = cos(TWO_PI * d[k] * h)
        rs[k] = sin(TWO_PI * d[k] * h)
    with nogil:
        for i in range(npts):
            if i % _ANCHOR == 0:
                t = i * h
                for k in range(K):
                    c[k] = cos(TWO_PI * d[k] * t)
                    s[k] = sin(TWO_PI * d[k] * t)
            for r in range(R):
                acc = 0.0
                for k in range(K):
                    acc = acc + ar[r, k] * c[k] - ai[r, k] * s[k]
                out[r, i] = scale * acc
            for k in range(K):
                tmp = c[k] * rc[k] - s[k] * rs[k]
                s[k] = s[k] * rc[k] + c[k] * rs[k]
                c[k] = tmp
    return out_arr


cdef inline void _eval(double[::1] d, double[::1] ar, double[::1] ai, double scale,
                       double t, double* f, double* fp) noexcept nogil:
    cdef Py_ssize_t k
    cdef double acc = 0.0, dacc = 0.0, c, s, w
    for k in range(d.shape[0]):
        w = TWO_PI * d[k]
        c = cos(w * t)
        s = sin(w * t)
        acc += ar[k] * c - ai[k] * s
        dacc += w * (-ar[k] * s - ai[k] * c)
    f[0] = scale * acc
    fp[0] = scale * dacc


def eval_points(freqs, cre, cim, double scale, ts):
    cdef double[::1] d = np.ascontiguousarray(freqs, dtype=np.float64)
    cdef double[::1] ar = np.ascontiguousarray(cre, dtype=np.float64)
    cdef double[::1] ai = np.ascontiguousarray(cim, dtype=np.float64)
    ts_arr = np.asarray(ts, dtype=np.float64)
    shape = ts_arr.shape
    cdef double[::1] t = np.ascontiguousarray(ts_arr.ravel())
    cdef Py_ssize_t n = t.shape[0], i
    f_arr = np.empty(n)
    fp_arr = np.empty(n)
    cdef double[::1] f = f_arr, fp = fp_arr
    with nogil:
        for i in range(n):
            _eval(d, ar, ai, scale, t[i], &f[i], &fp[i])
    return f_arr.reshape(shape), fp_arr.reshape(shape)


def bisect(freqs, cre, cim, double scale, lo, hi, double tol):
    cdef double[::1] d = np.ascontiguousarray(freqs, dtype=np.float64)
    cdef double[::1] ar = np.ascontiguousarray(cre, dtype=np.float64)
    cdef double[::1] ai = np.ascontiguousarray(cim, dtype=np.float64)
    lo_arr = np.array(lo, dtype=np.float64)
    hi_arr = np.array(hi, dtype=np.float64)
    cdef double[::1] a = lo_arr, b = hi_arr
    cdef Py_ssize_t n = a.shape[0], i
    cdef double fa, fm, mid, dummy
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            _eval(d, ar, ai, scale, a[i], &fa, &dummy)
            while b[i] - a[i] > tol:
                mid = 0.5 * (a[i] + b[i])
                if mid == a[i] or mid == b[i]:
                    break
                _eval(d, ar, ai, scale, mid, &fm, &dummy)
                if fm == 0.0:
                    a[i] = mid
                    b[i] = mid
                elif (fm > 0) == (fa > 0):
                    a[i] = mid
                    fa = fm
                else:
                    b[i] = mid
            out[i] = 0.5 * (a[i] + b[i])
    return out_arr
