# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled state-vector kernels.

All routines work in place on a contiguous complex128 amplitude buffer of
length ``2**n``. Atom 0 is the most significant bit of the basis index.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _bit(int n, int atom):
    return (<Py_ssize_t>1) << (n - 1 - atom)


def apply_1q(double complex[::1] psi, const double complex[:, ::1] u, int n, int target):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t m = _bit(n, target)
    cdef Py_ssize_t i
    cdef double complex a0, a1
    cdef double complex u00 = u[0, 0], u01 = u[0, 1], u10 = u[1, 0], u11 = u[1, 1]
    for i in range(dim):
        if i & m:
            continue
        a0 = psi[i]
        a1 = psi[i | m]
        psi[i] = u00 * a0 + u01 * a1
        psi[i | m] = u10 * a0 + u11 * a1


def apply_2q(double complex[::1] psi, const double complex[:, ::1] u, int n, int t0, int t1):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t m0 = _bit(n, t0)
    cdef Py_ssize_t m1 = _bit(n, t1)
    cdef Py_ssize_t i, r, c
    cdef Py_ssize_t idx[4]
    cdef double complex a[4]
    cdef double complex acc
    for i in range(dim):
        if (i & m0) or (i & m1):
            continue
        idx[0] = i
        idx[1] = i | m1
        idx[2] = i | m0
        idx[3] = i | m0 | m1
        for r in range(4):
            a[r] = psi[idx[r]]
        for r in range(4):
            acc = 0
            for c in range(4):
                acc = acc + u[r, c] * a[c]
            psi[idx[r]] = acc


def marginal_probs(const double complex[::1] psi, int n, const long[::1] targets):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t k = targets.shape[0]
    cdef Py_ssize_t i, j, key
    cdef double complex z
    out_arr = np.zeros((<Py_ssize_t>1) << k, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(dim):
        key = 0
        for j in range(k):
            key = (key << 1) | ((i >> (n - 1 - targets[j])) & 1)
        z = psi[i]
        out[key] += z.real * z.real + z.imag * z.imag
    return out_arr


def collapse(double complex[::1] psi, int n, const long[::1] targets, Py_ssize_t outcome):
    """Project onto ``outcome`` and renormalize; returns the projected weight."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t k = targets.shape[0]
    cdef Py_ssize_t i, j, key
    cdef double weight = 0.0
    cdef double complex z
    cdef double scale
    for i in range(dim):
        key = 0
        for j in range(k):
            key = (key << 1) | ((i >> (n - 1 - targets[j])) & 1)
        if key != outcome:
            psi[i] = 0
        else:
            z = psi[i]
            weight += z.real * z.real + z.imag * z.imag
    if weight > 0.0:
        scale = 1.0 / weight ** 0.5
        for i in range(dim):
            psi[i] = psi[i] * scale
    return weight
