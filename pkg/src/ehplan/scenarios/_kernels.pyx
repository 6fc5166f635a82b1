# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled reduction kernels; same contracts as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


def pairwise_distances(X):
    cdef double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], i, j, k
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] D = out
    cdef double acc, diff
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = x[i, k] - x[j, k]
                acc += diff * diff
            D[i, j] = sqrt(acc)
            D[j, i] = D[i, j]
    return out


cdef inline Py_ssize_t _nearest(double[:, ::1] D, char[::1] alive, Py_ssize_t i, Py_ssize_t n):
    cdef Py_ssize_t j, best = -1
    cdef double bd = INFINITY
    for j in range(n):
        if j != i and alive[j] and (best < 0 or D[i, j] < bd):
            bd = D[i, j]
            best = j
    return best


def backward_reduce(D_in, probs, Py_ssize_t target):
    cdef double[:, ::1] D = np.ascontiguousarray(D_in, dtype=np.float64)
    cdef Py_ssize_t n = D.shape[0], n_iter = n - target
    p_arr = np.array(probs, dtype=np.float64)
    alive_arr = np.ones(n, dtype=np.int8)
    nn_arr = np.empty(n, dtype=np.intp)
    removed = np.empty(n_iter, dtype=np.int64)
    absorbed = np.empty(n_iter, dtype=np.int64)
    pd = np.empty(n_iter, dtype=np.float64)
    cdef double[::1] p = p_arr
    cdef char[::1] alive = alive_arr
    cdef Py_ssize_t[::1] nn = nn_arr
    cdef long long[::1] rem = removed
    cdef long long[::1] ab = absorbed
    cdef double[::1] pdv = pd
    cdef Py_ssize_t it, i, best, j
    cdef double score, bscore
    for i in range(n):
        nn[i] = _nearest(D, alive, i, n)
    for it in range(n_iter):
        best = -1
        bscore = INFINITY
        for i in range(n):
            if not alive[i]:
                continue
            score = p[i] * D[i, nn[i]]
            if best < 0 or score < bscore:
                bscore = score
                best = i
        j = nn[best]
        rem[it] = best
        ab[it] = j
        pdv[it] = bscore
        p[j] += p[best]
        p[best] = 0.0
        alive[best] = 0
        # only scenarios whose neighbour just vanished need a new search
        for i in range(n):
            if alive[i] and nn[i] == best:
                nn[i] = _nearest(D, alive, i, n)
    return alive_arr.astype(bool), p_arr, removed, absorbed, pd


def kmeans_assign(X, C):
    cdef double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[:, ::1] c = np.ascontiguousarray(C, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], k = c.shape[0], d = x.shape[1], i, j, m, bj
    labels = np.empty(n, dtype=np.int64)
    cdef long long[::1] lab = labels
    cdef double acc, diff, bd, total = 0.0
    for i in range(n):
        bj = 0
        bd = INFINITY
        for j in range(k):
            acc = 0.0
            for m in range(d):
                diff = x[i, m] - c[j, m]
                acc += diff * diff
            if acc < bd:
                bd = acc
                bj = j
        lab[i] = bj
        total += bd
    return labels, total
