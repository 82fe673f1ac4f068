# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lifting kernels; drop-in replacement for ``_hankel_py``."""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def lift(grid, Py_ssize_t p1, Py_ssize_t q1, bint stacked):
    cdef double complex[:, :, ::1] g = np.ascontiguousarray(grid, dtype=np.complex128)
    cdef Py_ssize_t coils = g.shape[0], n1 = g.shape[1], m1 = g.shape[2]
    cdef Py_ssize_t nr = n1 - p1 + 1, mr = m1 - q1 + 1
    cdef Py_ssize_t rows = nr * mr, cols = p1 * q1
    cdef Py_ssize_t c, ib, a, jb, b, r0, c0
    out_arr = np.empty((rows * coils, cols) if stacked else (rows, cols * coils),
                       dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    for c in range(coils):
        r0 = c * rows if stacked else 0
        c0 = 0 if stacked else c * cols
        for ib in range(mr):
            for a in range(nr):
                for jb in range(q1):
                    for b in range(p1):
                        out[r0 + ib * nr + a, c0 + jb * p1 + b] = g[c, a + b, ib + jb]
    return out_arr


cdef void _scatter(double complex[:, ::1] mat, double complex[:, :, ::1] acc,
                   Py_ssize_t coils, Py_ssize_t n1, Py_ssize_t m1,
                   Py_ssize_t p1, Py_ssize_t q1, bint stacked) noexcept nogil:
    cdef Py_ssize_t nr = n1 - p1 + 1, mr = m1 - q1 + 1
    cdef Py_ssize_t rows = nr * mr, cols = p1 * q1
    cdef Py_ssize_t c, ib, a, jb, b, r0, c0
    for c in range(coils):
        r0 = c * rows if stacked else 0
        c0 = 0 if stacked else c * cols
        for ib in range(mr):
            for a in range(nr):
                for jb in range(q1):
                    for b in range(p1):
                        acc[c, a + b, ib + jb] += mat[r0 + ib * nr + a, c0 + jb * p1 + b]


def adjoint(mat, Py_ssize_t coils, Py_ssize_t n1, Py_ssize_t m1,
            Py_ssize_t p1, Py_ssize_t q1, bint stacked):
    cdef double complex[:, ::1] m = np.ascontiguousarray(mat, dtype=np.complex128)
    acc_arr = np.zeros((coils, n1, m1), dtype=np.complex128)
    cdef double complex[:, :, ::1] acc = acc_arr
    with nogil:
        _scatter(m, acc, coils, n1, m1, p1, q1, stacked)
    return acc_arr


def unlift(mat, Py_ssize_t coils, Py_ssize_t n1, Py_ssize_t m1,
           Py_ssize_t p1, Py_ssize_t q1, bint stacked):
    acc_arr = adjoint(mat, coils, n1, m1, p1, q1, stacked)
    cdef double complex[:, :, ::1] acc = acc_arr
    cdef Py_ssize_t c, i, j, ci, cj
    for c in range(coils):
        for i in range(n1):
            ci = min(i, n1 - 1 - i, p1 - 1, n1 - p1) + 1
            for j in range(m1):
                cj = min(j, m1 - 1 - j, q1 - 1, m1 - q1) + 1
                acc[c, i, j] = acc[c, i, j] / (ci * cj)
    return acc_arr
