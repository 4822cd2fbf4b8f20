# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled row-block kernel for shared-gram pair scoring."""

import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector

cnp.import_array()


def score_rows(const cnp.int32_t[::1] gram_indptr,
               const cnp.int32_t[::1] gram_ids,
               const cnp.int32_t[::1] sizes,
               const cnp.int32_t[::1] post_indptr,
               const cnp.int32_t[::1] post_ids,
               Py_ssize_t row_start,
               Py_ssize_t row_stop,
               double floor):
    """Score rows ``[row_start, row_stop)`` against every later post.

    ``gram_indptr/gram_ids`` is the CSR profile matrix (post -> gram ids),
    ``post_indptr/post_ids`` its transpose (gram -> ascending post ids).
    Returns ``(i, j, score)`` arrays sorted by ``(i, j)``.
    """
    cdef Py_ssize_t n = sizes.shape[0]
    cdef Py_ssize_t i, j, a, b, g
    cdef cnp.int32_t si, sj, m
    cdef double score
    cdef vector[cnp.int32_t] out_i
    cdef vector[cnp.int32_t] out_j
    cdef vector[double] out_s
    cdef cnp.int32_t[::1] counts = np.zeros(n, dtype=np.int32)

    with nogil:
        for i in range(row_start, row_stop):
            for a in range(gram_indptr[i], gram_indptr[i + 1]):
                g = gram_ids[a]
                for b in range(post_indptr[g], post_indptr[g + 1]):
                    j = post_ids[b]
                    if j > i:
                        counts[j] += 1
            si = sizes[i]
            for j in range(i + 1, n):
                sj = sizes[j]
                m = si if si < sj else sj
                score = <double>counts[j] / <double>m
                counts[j] = 0
                if score >= floor:
                    out_i.push_back(<cnp.int32_t>i)
                    out_j.push_back(<cnp.int32_t>j)
                    out_s.push_back(score)

    cdef Py_ssize_t k = out_i.size()
    ia = np.empty(k, dtype=np.int32)
    ja = np.empty(k, dtype=np.int32)
    sa = np.empty(k, dtype=np.float64)
    cdef cnp.int32_t[::1] iv = ia
    cdef cnp.int32_t[::1] jv = ja
    cdef double[::1] sv = sa
    for a in range(k):
        iv[a] = out_i[a]
        jv[a] = out_j[a]
        sv[a] = out_s[a]
    return ia, ja, sa
