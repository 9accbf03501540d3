# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for sparse generator application and X-spider support."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def sparse_apply(double complex[:, :, ::1] state,
                 long long[::1] rows, long long[::1] cols,
                 double complex[::1] vals, Py_ssize_t k_out):
    """out[l, r, x] = sum over nonzeros (r, c, v) of v * state[l, c, x]."""
    cdef Py_ssize_t L = state.shape[0], R = state.shape[2]
    cdef Py_ssize_t nnz = rows.shape[0]
    out_arr = np.zeros((L, k_out, R), dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr
    cdef Py_ssize_t e, l, x, r, c
    cdef double complex v
    with nogil:
        for l in range(L):
            for e in range(nnz):
                r = rows[e]
                c = cols[e]
                v = vals[e]
                for x in range(R):
                    out[l, r, x] += v * state[l, c, x]
    return out_arr


def xspider_coo(Py_ssize_t m, Py_ssize_t n, long long j, Py_ssize_t d):
    """Row/column indices of the X spider with ``m`` outputs and ``n`` inputs.

    Keeps the pairs with ``sum(out) + j == sum(in) (mod d)``; every kept entry is 1.
    """
    cdef Py_ssize_t n_in = 1, n_out = 1, t
    for t in range(n):
        n_in *= d
    for t in range(m):
        n_out *= d
    cdef Py_ssize_t nnz = 0
    if m == 0:
        nnz = n_in // d if n > 0 else (1 if j % d == 0 else 0)
    else:
        nnz = n_in * (n_out // d)
    rows_arr = np.empty(nnz, dtype=np.int64)
    cols_arr = np.empty(nnz, dtype=np.int64)
    cdef long long[::1] rows = rows_arr
    cdef long long[::1] cols = cols_arr
    cdef Py_ssize_t ci, ri, q, s_in, s_out, pos = 0
    cdef long long jm = ((j % d) + d) % d
    with nogil:
        for ci in range(n_in):
            s_in = 0
            q = ci
            while q > 0:
                s_in += q % d
                q //= d
            for ri in range(n_out):
                s_out = 0
                q = ri
                while q > 0:
                    s_out += q % d
                    q //= d
                if (s_out + jm - s_in) % d == 0:
                    rows[pos] = ri
                    cols[pos] = ci
                    pos += 1
    return rows_arr[:pos], cols_arr[:pos]
