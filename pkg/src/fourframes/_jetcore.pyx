# cython: boundscheck=False, wraparound=False, initializedcheck=False, language_level=3
"""Compiled truncated-product kernels; see ``_kernels`` for the calling convention."""

import numpy as np


def mul(const double[:, ::1] a, const double[:, ::1] b,
        const Py_ssize_t[::1] pi, const Py_ssize_t[::1] pj, const Py_ssize_t[::1] pk,
        starts, Py_ssize_t ncoef):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t npairs = pi.shape[0]
    cdef Py_ssize_t i, p
    out = np.zeros((n, ncoef))
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(n):
            for p in range(npairs):
                o[i, pk[p]] += a[i, pi[p]] * b[i, pj[p]]
    return out


def bmm(const double[:, :, :, ::1] a, const double[:, :, :, ::1] b,
        const Py_ssize_t[::1] pi, const Py_ssize_t[::1] pj, const Py_ssize_t[::1] pk,
        starts, Py_ssize_t ncoef):
    cdef Py_ssize_t nb = a.shape[0], nl = a.shape[1], nk = a.shape[2]
    cdef Py_ssize_t nr = b.shape[2]
    cdef Py_ssize_t npairs = pi.shape[0]
    cdef Py_ssize_t ib, l, k, r, p
    cdef double x
    out = np.zeros((nb, nl, nr, ncoef))
    cdef double[:, :, :, ::1] o = out
    with nogil:
        for ib in range(nb):
            for l in range(nl):
                for k in range(nk):
                    for r in range(nr):
                        for p in range(npairs):
                            o[ib, l, r, pk[p]] += a[ib, l, k, pi[p]] * b[ib, k, r, pj[p]]
    return out
