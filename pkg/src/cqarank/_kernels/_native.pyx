# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the hot loops: edit distance and postings scoring."""

from libc.math cimport log
from libc.stdlib cimport free, malloc


def levenshtein_distance(unicode a, unicode b) -> int:
    cdef Py_ssize_t la = len(a), lb = len(b)
    if la < lb:
        a, b = b, a
        la, lb = lb, la
    if lb == 0:
        return la

    cdef int *prev = <int *> malloc((lb + 1) * sizeof(int))
    cdef int *cur = <int *> malloc((lb + 1) * sizeof(int))
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()

    cdef Py_ssize_t i, j
    cdef int cost, best
    cdef int *tmp
    cdef Py_UCS4 ca
    try:
        for j in range(lb + 1):
            prev[j] = <int> j
        for i in range(1, la + 1):
            cur[0] = <int> i
            ca = a[i - 1]
            for j in range(1, lb + 1):
                cost = 0 if ca == b[j - 1] else 1
                best = prev[j] + 1
                if cur[j - 1] + 1 < best:
                    best = cur[j - 1] + 1
                if prev[j - 1] + cost < best:
                    best = prev[j - 1] + cost
                cur[j] = best
            tmp = prev
            prev = cur
            cur = tmp
        return prev[lb]
    finally:
        free(prev)
        free(cur)


def levenshtein_within(unicode a, unicode b, int limit) -> int:
    """Edit distance capped at `limit`: returns limit + 1 once it is exceeded."""
    if limit < 0:
        raise ValueError("limit must be non-negative")
    cdef Py_ssize_t la = len(a), lb = len(b)
    if la < lb:
        a, b = b, a
        la, lb = lb, la
    if la - lb > <Py_ssize_t> limit:
        return limit + 1
    if lb == 0:
        return <int> la

    cdef int *prev = <int *> malloc((lb + 1) * sizeof(int))
    cdef int *cur = <int *> malloc((lb + 1) * sizeof(int))
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()

    cdef Py_ssize_t i, j
    cdef int cost, best, row_min
    cdef int *tmp
    cdef Py_UCS4 ca
    try:
        for j in range(lb + 1):
            prev[j] = <int> j
        for i in range(1, la + 1):
            cur[0] = <int> i
            row_min = <int> i
            ca = a[i - 1]
            for j in range(1, lb + 1):
                cost = 0 if ca == b[j - 1] else 1
                best = prev[j] + 1
                if cur[j - 1] + 1 < best:
                    best = cur[j - 1] + 1
                if prev[j - 1] + cost < best:
                    best = prev[j - 1] + cost
                cur[j] = best
                if best < row_min:
                    row_min = best
            if row_min > limit:
                return limit + 1
            tmp = prev
            prev = cur
            cur = tmp
        return prev[lb] if prev[lb] <= limit else limit + 1
    finally:
        free(prev)
        free(cur)


def bm25_accumulate(int[::1] doc_pos, int[::1] tfs, double idf, double k1,
                    double[::1] denom, double[::1] scores) -> None:
    """Add one query term's saturated-tf contribution to candidate scores."""
    cdef Py_ssize_t n = doc_pos.shape[0]
    cdef Py_ssize_t i
    cdef int pos
    cdef double tf
    for i in range(n):
        pos = doc_pos[i]
        tf = <double> tfs[i]
        scores[pos] += idf * (tf * (k1 + 1.0)) / (tf + denom[pos])


def lmd_accumulate(int[::1] doc_pos, int[::1] tfs, double mu_pc, double qtf,
                   double[::1] scores) -> None:
    """Add a query term's matched-document log-likelihood adjustment."""
    cdef Py_ssize_t n = doc_pos.shape[0]
    cdef Py_ssize_t i
    cdef double log_bg = log(mu_pc)
    for i in range(n):
        scores[doc_pos[i]] += qtf * (log((<double> tfs[i]) + mu_pc) - log_bg)
