# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled discrete Frechet kernels (squared-distance DP, rolling row)."""

import numpy as np
from libc.math cimport sqrt
from libc.stdlib cimport malloc, free


cdef double _core(const double[:, :, :] A, Py_ssize_t a,
                  const double[:, :, :] B, Py_ssize_t b,
                  Py_ssize_t p, Py_ssize_t q, Py_ssize_t d,
                  double* row) noexcept nogil:
    cdef Py_ssize_t i, j, t
    cdef double c, diff, v, up, left, diag, old
    for i in range(p):
        diag = 0.0
        for j in range(q):
            c = 0.0
            for t in range(d):
                diff = A[a, i, t] - B[b, j, t]
                c += diff * diff
            old = row[j]
            if i == 0:
                if j == 0:
                    v = c
                else:
                    v = row[j - 1] if row[j - 1] > c else c
            elif j == 0:
                v = old if old > c else c
            else:
                up = old
                left = row[j - 1]
                v = up if up < left else left
                if diag < v:
                    v = diag
                if c > v:
                    v = c
            diag = old
            row[j] = v
    return row[q - 1]


def dfd(const double[:, :] p, const double[:, :] q):
    """Discrete Frechet distance between two (m, d) arrays."""
    cdef Py_ssize_t m = p.shape[0], n = q.shape[0], d = p.shape[1]
    cdef const double[:, :, :] A = np.asarray(p)[None]
    cdef const double[:, :, :] B = np.asarray(q)[None]
    cdef double* row = <double*> malloc(n * sizeof(double))
    cdef double out
    if row == NULL:
        raise MemoryError()
    try:
        with nogil:
            out = _core(A, 0, B, 0, m, n, d, row)
    finally:
        free(row)
    return sqrt(out)


def dfd_pairs(const double[:, :, :] A, const double[:, :, :] B):
    """Row-wise distances between A[i] and B[i]; either may be broadcast."""
    cdef Py_ssize_t N = A.shape[0] if A.shape[0] > B.shape[0] else B.shape[0]
    cdef Py_ssize_t p = A.shape[1], q = B.shape[1], d = A.shape[2]
    cdef Py_ssize_t sa = 0 if A.shape[0] == 1 else 1
    cdef Py_ssize_t sb = 0 if B.shape[0] == 1 else 1
    out = np.empty(N, dtype=np.float64)
    cdef double[::1] o = out
    cdef double* row = <double*> malloc(q * sizeof(double))
    cdef Py_ssize_t n
    if row == NULL:
        raise MemoryError()
    try:
        with nogil:
            for n in range(N):
                o[n] = sqrt(_core(A, n * sa, B, n * sb, p, q, d, row))
    finally:
        free(row)
    return out
