# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of the interaction kernels.

Same contracts and (up to summation order) same values as _kernels_ref; see
that module for the image-term algebra. Plain serial loops in target-major
order, so each backend is individually deterministic.
"""

import numpy as np

from libc.math cimport log


def momentum_sum(zt, zp, gam, dl2, double alpha, bint exclude_self):
    """See _kernels_ref.momentum_sum."""
    zt = np.ascontiguousarray(zt, dtype=np.complex128)
    zp = np.ascontiguousarray(zp, dtype=np.complex128)
    gam = np.ascontiguousarray(gam, dtype=np.float64)
    dl2 = np.ascontiguousarray(dl2, dtype=np.float64)
    if exclude_self and zt.shape[0] != zp.shape[0]:
        raise ValueError("exclude_self requires matching target/source arrays")
    out = np.empty(zt.shape[0], dtype=np.complex128)

    cdef const double complex[::1] t = zt
    cdef const double complex[::1] p = zp
    cdef const double[::1] g = gam
    cdef const double[::1] q = dl2
    cdef double complex[::1] o = out
    cdef Py_ssize_t m = t.shape[0], n = p.shape[0]
    cdef Py_ssize_t i, j
    cdef double complex z, d, acc
    cdef double zt2, pj2, r2, pp

    for i in range(m):
        z = t[i]
        zt2 = z.real * z.real + z.imag * z.imag
        acc = 0
        for j in range(n):
            d = z - p[j]
            r2 = d.real * d.real + d.imag * d.imag
            pj2 = p[j].real * p[j].real + p[j].imag * p[j].imag
            pp = (zt2 - 1.0) * (pj2 - 1.0)
            if not (exclude_self and j == i):
                acc = acc + g[j] * d / (r2 + q[j])
            acc = acc - g[j] * (z * pj2 - p[j]) / (r2 + pp)
        if alpha != 0.0:
            acc = acc + alpha * z / zt2
        o[i] = acc
    return out


def stream_sum(zt, zp, gam, dl2, double alpha):
    """See _kernels_ref.stream_sum."""
    zt = np.ascontiguousarray(zt, dtype=np.complex128)
    zp = np.ascontiguousarray(zp, dtype=np.complex128)
    gam = np.ascontiguousarray(gam, dtype=np.float64)
    dl2 = np.ascontiguousarray(dl2, dtype=np.float64)
    out = np.empty(zt.shape[0], dtype=np.float64)

    cdef const double complex[::1] t = zt
    cdef const double complex[::1] p = zp
    cdef const double[::1] g = gam
    cdef const double[::1] q = dl2
    cdef double[::1] o = out
    cdef Py_ssize_t m = t.shape[0], n = p.shape[0]
    cdef Py_ssize_t i, j
    cdef double complex z, d
    cdef double zt2, pj2, r2, pp, acc
    cdef double inv4pi = 1.0 / (4.0 * np.pi)

    for i in range(m):
        z = t[i]
        zt2 = z.real * z.real + z.imag * z.imag
        acc = 0.0
        for j in range(n):
            d = z - p[j]
            r2 = d.real * d.real + d.imag * d.imag
            pj2 = p[j].real * p[j].real + p[j].imag * p[j].imag
            pp = (zt2 - 1.0) * (pj2 - 1.0)
            acc = acc + g[j] * (log(r2 + q[j]) - log(r2 + pp))
        acc = acc * inv4pi
        if alpha != 0.0:
            acc = acc + alpha * inv4pi * log(zt2)
        o[i] = acc
    return out


def freespace_sum(zt, zp, gam, dl2):
    """See _kernels_ref.freespace_sum."""
    zt = np.ascontiguousarray(zt, dtype=np.complex128)
    zp = np.ascontiguousarray(zp, dtype=np.complex128)
    gam = np.ascontiguousarray(gam, dtype=np.float64)
    dl2 = np.ascontiguousarray(dl2, dtype=np.float64)
    out = np.empty(zt.shape[0], dtype=np.complex128)

    cdef const double complex[::1] t = zt
    cdef const double complex[::1] p = zp
    cdef const double[::1] g = gam
    cdef const double[::1] q = dl2
    cdef double complex[::1] o = out
    cdef Py_ssize_t m = t.shape[0], n = p.shape[0]
    cdef Py_ssize_t i, j
    cdef double complex z, d, acc
    cdef double r2

    for i in range(m):
        z = t[i]
        acc = 0
        for j in range(n):
            d = z - p[j]
            r2 = d.real * d.real + d.imag * d.imag
            acc = acc + g[j] * d / (r2 + q[j])
        o[i] = acc
    return out
