# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled exact rank kernel: the same fraction-free elimination as the
pure-Python module, on int64 entries with overflow detection.

``rank_int_rows`` returns -1 when an intermediate value leaves int64; the
caller then reruns the elimination with Python integers.
"""
from libc.stdint cimport int64_t
from libcpp.vector cimport vector
from libcpp.pair cimport pair
from libcpp.algorithm cimport sort
from libcpp cimport bool as cbool

ctypedef pair[int, int64_t] entry_t
ctypedef vector[entry_t] row_t

cdef extern from *:
    """
    #include <cstdint>
    static inline bool wf_mul(int64_t a, int64_t b, int64_t *out) {
        return __builtin_mul_overflow(a, b, out);
    }
    static inline bool wf_sub(int64_t a, int64_t b, int64_t *out) {
        return __builtin_sub_overflow(a, b, out);
    }
    """
    cbool wf_mul(int64_t a, int64_t b, int64_t *out) nogil
    cbool wf_sub(int64_t a, int64_t b, int64_t *out) nogil


cdef inline int64_t _gcd(int64_t a, int64_t b) nogil:
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        a, b = b, a % b
    return a


cdef int _primitive(row_t &row) nogil:
    cdef int64_t g = 0
    cdef size_t k
    for k in range(row.size()):
        g = _gcd(g, row[k].second)
        if g == 1:
            break
    if row[0].second < 0:
        g = -g
    if g != 1:
        for k in range(row.size()):
            row[k].second = row[k].second // g
    return 0


cdef int _combine(int64_t a, const row_t &row, int64_t b, const row_t &piv, row_t &out) nogil:
    """out = a*row - b*piv; returns 1 on overflow."""
    cdef size_t i = 0, j = 0
    cdef size_t n = row.size(), m = piv.size()
    cdef int64_t x, y, v
    out.clear()
    while i < n and j < m:
        if row[i].first == piv[j].first:
            if wf_mul(a, row[i].second, &x) or wf_mul(b, piv[j].second, &y) or wf_sub(x, y, &v):
                return 1
            if v != 0:
                out.push_back(entry_t(row[i].first, v))
            i += 1
            j += 1
        elif row[i].first < piv[j].first:
            if wf_mul(a, row[i].second, &x):
                return 1
            out.push_back(entry_t(row[i].first, x))
            i += 1
        else:
            if wf_mul(b, piv[j].second, &y) or wf_sub(0, y, &v):
                return 1
            out.push_back(entry_t(piv[j].first, v))
            j += 1
    while i < n:
        if wf_mul(a, row[i].second, &x):
            return 1
        out.push_back(entry_t(row[i].first, x))
        i += 1
    while j < m:
        if wf_mul(b, piv[j].second, &y) or wf_sub(0, y, &v):
            return 1
        out.push_back(entry_t(piv[j].first, v))
        j += 1
    return 0


cdef cbool _by_len(const row_t &a, const row_t &b) nogil:
    return a.size() < b.size()


def rank_int_rows(rows, int ncols):
    """Rank of sparse integer rows (lists of (col, value)); -1 on int64 overflow."""
    cdef vector[row_t] mat
    cdef row_t r
    cdef int64_t big = (1 << 62)
    for py_row in rows:
        if not py_row:
            continue
        r.clear()
        for c, v in py_row:
            if v >= big or v <= -big:
                return -1
            r.push_back(entry_t(c, v))
        mat.push_back(r)
    cdef vector[row_t] pivots = vector[row_t](ncols)
    cdef int rank = 0
    cdef row_t cur, tmp
    cdef int lead
    cdef int64_t a, b, g
    cdef size_t k
    with nogil:
        sort(mat.begin(), mat.end(), _by_len)
        for k in range(mat.size()):
            cur = mat[k]
            _primitive(cur)
            while cur.size() > 0:
                lead = cur[0].first
                if pivots[lead].size() == 0:
                    pivots[lead] = cur
                    rank += 1
                    break
                a = pivots[lead][0].second
                b = cur[0].second
                g = _gcd(a, b)
                if _combine(a // g, cur, b // g, pivots[lead], tmp):
                    rank = -1
                    break
                cur.swap(tmp)
                if cur.size() > 0:
                    _primitive(cur)
            if rank < 0:
                break
    return rank
