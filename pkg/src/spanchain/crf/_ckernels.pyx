# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled chain dynamic programs: forward log-partition, forward-backward
posteriors, and masked Viterbi.  Semantics match ``_pykernels`` exactly,
including lowest-index tie-breaking in Viterbi.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, log

cnp.import_array()


cdef double _lse_row(const double* v, Py_ssize_t n) noexcept nogil:
    cdef double m = -INFINITY
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        if v[i] > m:
            m = v[i]
    if m == -INFINITY:
        return -INFINITY
    for i in range(n):
        s += exp(v[i] - m)
    return m + log(s)


def logz(double[:, ::1] scores, double[:, ::1] trans, double[::1] start, double[::1] end):
    cdef Py_ssize_t T = scores.shape[0]
    cdef Py_ssize_t K = scores.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] alpha_arr = np.empty(K)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] nxt_arr = np.empty(K)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] work_arr = np.empty(K)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] nxt = nxt_arr
    cdef double[::1] work = work_arr
    cdef Py_ssize_t t, i, j
    for j in range(K):
        alpha[j] = start[j] + scores[0, j]
    for t in range(1, T):
        for j in range(K):
            for i in range(K):
                work[i] = alpha[i] + trans[i, j]
            nxt[j] = scores[t, j] + _lse_row(&work[0], K)
        alpha[:] = nxt
    for j in range(K):
        work[j] = alpha[j] + end[j]
    return _lse_row(&work[0], K)


def posteriors(double[:, ::1] scores, double[:, ::1] trans, double[::1] start, double[::1] end):
    cdef Py_ssize_t T = scores.shape[0]
    cdef Py_ssize_t K = scores.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] alpha_arr = np.empty((T, K))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] beta_arr = np.empty((T, K))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] unary_arr = np.empty((T, K))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pair_arr = np.zeros((K, K))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] work_arr = np.empty(K)
    cdef double[:, ::1] alpha = alpha_arr
    cdef double[:, ::1] beta = beta_arr
    cdef double[:, ::1] unary = unary_arr
    cdef double[:, ::1] pair = pair_arr
    cdef double[::1] work = work_arr
    cdef Py_ssize_t t, i, j
    cdef double log_z

    for j in range(K):
        alpha[0, j] = start[j] + scores[0, j]
    for t in range(1, T):
        for j in range(K):
            for i in range(K):
                work[i] = alpha[t - 1, i] + trans[i, j]
            alpha[t, j] = scores[t, j] + _lse_row(&work[0], K)
    for j in range(K):
        beta[T - 1, j] = end[j]
    for t in range(T - 2, -1, -1):
        for i in range(K):
            for j in range(K):
                work[j] = trans[i, j] + scores[t + 1, j] + beta[t + 1, j]
            beta[t, i] = _lse_row(&work[0], K)
    for j in range(K):
        work[j] = alpha[T - 1, j] + end[j]
    log_z = _lse_row(&work[0], K)

    for t in range(T):
        for j in range(K):
            unary[t, j] = exp(alpha[t, j] + beta[t, j] - log_z)
    for t in range(T - 1):
        for i in range(K):
            for j in range(K):
                pair[i, j] += exp(
                    alpha[t, i] + trans[i, j] + scores[t + 1, j] + beta[t + 1, j] - log_z
                )
    return log_z, unary_arr, pair_arr


def viterbi(
    double[:, ::1] scores,
    double[:, ::1] trans,
    double[::1] start,
    double[::1] end,
    cnp.uint8_t[:, ::1] allowed,
    cnp.uint8_t[::1] allowed_start,
    cnp.uint8_t[::1] allowed_end,
):
    cdef Py_ssize_t T = scores.shape[0]
    cdef Py_ssize_t K = scores.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] delta_arr = np.empty(K)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] nxt_arr = np.empty(K)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] backptr_arr = np.zeros((T, K), dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] path_arr = np.empty(T, dtype=np.int64)
    cdef double[::1] delta = delta_arr
    cdef double[::1] nxt = nxt_arr
    cdef cnp.int64_t[:, ::1] backptr = backptr_arr
    cdef cnp.int64_t[::1] path = path_arr
    cdef Py_ssize_t t, i, j, best_i
    cdef double best, cand, final_best
    cdef Py_ssize_t final_arg

    for j in range(K):
        delta[j] = start[j] + scores[0, j] if allowed_start[j] else -INFINITY
    for t in range(1, T):
        for j in range(K):
            best = -INFINITY
            best_i = 0
            for i in range(K):
                if not allowed[i, j]:
                    continue
                cand = delta[i] + trans[i, j]
                if cand > best:
                    best = cand
                    best_i = i
            nxt[j] = scores[t, j] + best
            backptr[t, j] = best_i
        delta[:] = nxt
    final_best = -INFINITY
    final_arg = 0
    for j in range(K):
        cand = delta[j] + end[j] if allowed_end[j] else -INFINITY
        if cand > final_best:
            final_best = cand
            final_arg = j
    path[T - 1] = final_arg
    for t in range(T - 1, 0, -1):
        path[t - 1] = backptr[t, path[t]]
    return path_arr, final_best
