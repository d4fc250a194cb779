# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled solver kernel.

Mirrors `reference.coupled_jacobi` expression for expression; the build
disables FP contraction so both backends produce bit-identical output.
"""

import numpy as np

cimport cython


def coupled_jacobi(
    double[:, ::1] j11,
    double[:, ::1] j12,
    double[:, ::1] j22,
    double[:, ::1] j13,
    double[:, ::1] j23,
    double alpha,
    int iterations,
    double[:, ::1] u0,
    double[:, ::1] v0,
):
    cdef Py_ssize_t h = j11.shape[0]
    cdef Py_ssize_t w = j11.shape[1]

    a_arr = np.empty((h, w), dtype=np.float64)
    c_arr = np.empty((h, w), dtype=np.float64)
    det_arr = np.empty((h, w), dtype=np.float64)
    u_arr = np.array(u0, dtype=np.float64, copy=True)
    v_arr = np.array(v0, dtype=np.float64, copy=True)
    un_arr = np.empty((h, w), dtype=np.float64)
    vn_arr = np.empty((h, w), dtype=np.float64)

    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] c = c_arr
    cdef double[:, ::1] det = det_arr
    cdef double[:, ::1] u = u_arr
    cdef double[:, ::1] v = v_arr
    cdef double[:, ::1] un = un_arr
    cdef double[:, ::1] vn = vn_arr
    cdef double[:, ::1] tmp

    cdef double alpha2 = alpha * alpha
    cdef double ubar, vbar, ru, rv, b
    cdef Py_ssize_t x, y, it, ym, yp, xm, xp

    with nogil:
        for y in range(h):
            for x in range(w):
                a[y, x] = alpha2 + j11[y, x]
                c[y, x] = alpha2 + j22[y, x]
                det[y, x] = a[y, x] * c[y, x] - j12[y, x] * j12[y, x]

        for it in range(iterations):
            for y in range(h):
                ym = y - 1 if y > 0 else 0
                yp = y + 1 if y < h - 1 else h - 1
                for x in range(w):
                    xm = x - 1 if x > 0 else 0
                    xp = x + 1 if x < w - 1 else w - 1
                    ubar = (u[ym, x] + u[yp, x] + u[y, xm] + u[y, xp]) * 0.25
                    vbar = (v[ym, x] + v[yp, x] + v[y, xm] + v[y, xp]) * 0.25
                    ru = alpha2 * ubar - j13[y, x]
                    rv = alpha2 * vbar - j23[y, x]
                    b = j12[y, x]
                    un[y, x] = (c[y, x] * ru - b * rv) / det[y, x]
                    vn[y, x] = (a[y, x] * rv - b * ru) / det[y, x]
            tmp = u
            u = un
            un = tmp
            tmp = v
            v = vn
            vn = tmp

    if iterations % 2 == 1:
        return un_arr, vn_arr
    return u_arr, v_arr
