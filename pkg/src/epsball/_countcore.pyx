# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled query kernel for the uniform grid index."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def count_queries(double[:, ::1] pts, cnp.int64_t[::1] ukeys, cnp.int64_t[::1] starts,
                  double[:, ::1] queries, cnp.int64_t[:, ::1] qcells,
                  cnp.int64_t[::1] extents, cnp.int64_t[::1] strides,
                  cnp.int64_t[:, ::1] offsets, double eps):
    cdef Py_ssize_t nq = queries.shape[0]
    cdef Py_ssize_t d = queries.shape[1]
    cdef Py_ssize_t noff = offsets.shape[0]
    cdef Py_ssize_t nu = ukeys.shape[0]
    cdef double eps2 = eps * eps
    out = np.zeros(nq, dtype=np.int64)
    cdef cnp.int64_t[::1] outv = out
    cdef Py_ssize_t i, o, j, p, lo, hi, mid
    cdef cnp.int64_t key, cnt, c
    cdef bint ok
    cdef double s, diff

    for i in range(nq):
        cnt = 0
        for o in range(noff):
            ok = True
            key = 0
            for j in range(d):
                c = qcells[i, j] + offsets[o, j]
                if c < 0 or c >= extents[j]:
                    ok = False
                    break
                key += c * strides[j]
            if not ok:
                continue
            lo = 0
            hi = nu
            while lo < hi:
                mid = (lo + hi) >> 1
                if ukeys[mid] < key:
                    lo = mid + 1
                else:
                    hi = mid
            if lo == nu or ukeys[lo] != key:
                continue
            for p in range(starts[lo], starts[lo + 1]):
                s = 0.0
                for j in range(d):
                    diff = pts[p, j] - queries[i, j]
                    s += diff * diff
                if s < eps2:
                    cnt += 1
        outv[i] = cnt
    return out
