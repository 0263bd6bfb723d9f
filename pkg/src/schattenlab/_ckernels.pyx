# cython: language_level=3
"""Compiled versions of the kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, M_PI

cnp.import_array()


def lattice_norm_counts(int n, long jmax):
    """Number of k in Z^n with |k|^2 == j, for j = 0..jmax (direct enumeration)."""
    if n < 1:
        raise ValueError("dimension must be positive")
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(jmax + 1, dtype=np.int64)
    cdef long kmax = <long>sqrt(<double>jmax)
    while (kmax + 1) * (kmax + 1) <= jmax:
        kmax += 1
    while kmax * kmax > jmax:
        kmax -= 1
    cdef long a, b, c, t1, t2, t3
    cdef long w1, w2, w3
    if n == 1:
        counts[0] = 1
        for a in range(1, kmax + 1):
            counts[a * a] += 2
    elif n == 2:
        for a in range(0, kmax + 1):
            t1 = a * a
            w1 = 1 if a == 0 else 2
            for b in range(0, kmax + 1):
                t2 = t1 + b * b
                if t2 > jmax:
                    break
                w2 = w1 if b == 0 else 2 * w1
                counts[t2] += w2
    elif n == 3:
        for a in range(0, kmax + 1):
            t1 = a * a
            w1 = 1 if a == 0 else 2
            for b in range(0, kmax + 1):
                t2 = t1 + b * b
                if t2 > jmax:
                    break
                w2 = w1 if b == 0 else 2 * w1
                for c in range(0, kmax + 1):
                    t3 = t2 + c * c
                    if t3 > jmax:
                        break
                    w3 = w2 if c == 0 else 2 * w2
                    counts[t3] += w3
    else:
        from schattenlab._pykernels import lattice_norm_counts as slow
        return slow(n, jmax)
    return counts


def legendre_table(int m, int lmax, x):
    """Orthonormal associated Legendre functions P(l, m, x) for l = m..lmax."""
    if m < 0 or lmax < m:
        raise ValueError("need 0 <= m <= lmax")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t npts = xs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((lmax - m + 1, npts))
    cdef double[:, ::1] o = out
    cdef double[::1] xv = xs
    cdef Py_ssize_t j
    cdef int i, ell, row
    cdef double s, pmm, a, b, mm = m
    cdef double start = 1.0 / sqrt(4.0 * M_PI)
    cdef double diag = 1.0
    for i in range(1, m + 1):
        diag *= -sqrt((2.0 * i + 1.0) / (2.0 * i))
    for j in range(npts):
        s = 1.0 - xv[j] * xv[j]
        s = sqrt(s) if s > 0.0 else 0.0
        o[0, j] = start * diag * (s ** m)
    if lmax == m:
        return out
    a = sqrt(2.0 * m + 3.0)
    for j in range(npts):
        o[1, j] = xv[j] * a * o[0, j]
    for ell in range(m + 2, lmax + 1):
        a = sqrt((4.0 * ell * ell - 1.0) / (<double>ell * ell - mm * mm))
        b = sqrt(((ell - 1.0) * (ell - 1.0) - mm * mm) / (4.0 * (ell - 1.0) * (ell - 1.0) - 1.0))
        row = ell - m
        for j in range(npts):
            o[row, j] = a * (xv[j] * o[row - 1, j] - b * o[row - 2, j])
    return out
