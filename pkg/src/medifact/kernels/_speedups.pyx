# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled Levenshtein kernel over int32 code sequences.

The package-level wrappers in kernels/__init__.py encode strings and token
lists into int32 arrays before calling in here; the GIL is released for the
dynamic program so prediction threads can overlap.
"""

from libc.stdint cimport int32_t
from libc.stdlib cimport free, malloc


def levenshtein_i32(const int32_t[::1] a, const int32_t[::1] b):
    """Exact unit-cost Levenshtein distance between two int32 sequences."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    if n == 0:
        return m
    if m == 0:
        return n
    cdef const int32_t[::1] s = a
    cdef const int32_t[::1] t = b
    cdef Py_ssize_t tmp_n
    if n > m:
        s, t = b, a
        tmp_n = n
        n = m
        m = tmp_n
    cdef int result
    with nogil:
        result = _lev_core(s, t, n, m)
    if result < 0:
        raise MemoryError("levenshtein work buffer allocation failed")
    return result


cdef int _lev_core(const int32_t[::1] s, const int32_t[::1] t,
                   Py_ssize_t n, Py_ssize_t m) noexcept nogil:
    cdef int *prev = <int *> malloc((n + 1) * sizeof(int))
    cdef int *cur = <int *> malloc((n + 1) * sizeof(int))
    if prev == NULL or cur == NULL:
        if prev != NULL:
            free(prev)
        if cur != NULL:
            free(cur)
        return -1
    cdef Py_ssize_t i, j
    cdef int cost, best
    cdef int32_t tc
    cdef int *swap
    for j in range(n + 1):
        prev[j] = <int> j
    for i in range(1, m + 1):
        cur[0] = <int> i
        tc = t[i - 1]
        for j in range(1, n + 1):
            if s[j - 1] == tc:
                cur[j] = prev[j - 1]
            else:
                best = prev[j]
                if cur[j - 1] < best:
                    best = cur[j - 1]
                if prev[j - 1] < best:
                    best = prev[j - 1]
                cur[j] = best + 1
        swap = prev
        prev = cur
        cur = swap
    best = prev[n]
    free(prev)
    free(cur)
    return best
