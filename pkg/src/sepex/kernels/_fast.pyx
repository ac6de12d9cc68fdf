# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels. Must stay bit-identical to ``_ref.py``."""

from libc.stdint cimport uint64_t, int64_t

import numpy as np


cdef uint64_t MIX_A = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX_B = 0x94D049BB133111EBULL
cdef uint64_t GOLD = 0x9E3779B97F4A7C15ULL
cdef uint64_t MULT = 0xD1342543DE82EF95ULL
cdef double U53 = 2.0 ** -53


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX_A
    z = (z ^ (z >> 27)) * MIX_B
    return z ^ (z >> 31)


cdef inline uint64_t _fold(uint64_t h, uint64_t v) noexcept nogil:
    return _mix(h ^ (v * MULT + GOLD + (h << 6) + (h >> 2)))


def hash_tuples(base, coords):
    """Fold the columns of ``coords`` (n, K) uint64 into per-row hashes."""
    cdef uint64_t b = base
    cdef uint64_t[:, ::1] c = coords
    cdef Py_ssize_t n = c.shape[0], k = c.shape[1], i, j
    out_arr = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] out = out_arr
    cdef uint64_t h
    with nogil:
        for i in range(n):
            h = b
            for j in range(k):
                h = _fold(h, c[i, j])
            out[i] = h
    return out_arr


def uniform_block(h, dim):
    """Expand per-row hashes into (n, dim) uniforms in [0, 1)."""
    cdef uint64_t[::1] hv = h
    cdef Py_ssize_t n = hv.shape[0], m = dim, i, d
    out_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(n):
            for d in range(m):
                out[i, d] = <double>(_fold(hv[i], <uint64_t>d) >> 11) * U53
    return out_arr


def hash_float_columns(h, cols):
    """Fold the float64 bit patterns of ``cols`` (n, m) into hashes ``h`` (n,)."""
    cdef uint64_t[::1] hv = h
    cdef double[:, ::1] c = cols
    cdef Py_ssize_t n = c.shape[0], m = c.shape[1], i, j
    out_arr = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] out = out_arr
    cdef uint64_t acc
    cdef double x
    with nogil:
        for i in range(n):
            acc = hv[i]
            for j in range(m):
                x = c[i, j]
                acc = _fold(acc, (<uint64_t*> &x)[0])
            out[i] = acc
    return out_arr


def greedy_cover(dist2, radius2):
    """Farthest-reach greedy internal cover on a squared-distance matrix."""
    cdef double[:, ::1] d = dist2
    cdef double r2 = radius2
    cdef Py_ssize_t m = d.shape[0], i, j, c
    covered_arr = np.zeros(m, dtype=np.uint8)
    cdef unsigned char[::1] covered = covered_arr
    centers_arr = np.empty(m, dtype=np.int64)
    cdef int64_t[::1] centers = centers_arr
    cdef Py_ssize_t nc = 0
    with nogil:
        for i in range(m):
            if covered[i]:
                continue
            c = i
            for j in range(m - 1, -1, -1):
                if d[i, j] <= r2:
                    c = j
                    break
            centers[nc] = c
            nc += 1
            for j in range(m):
                if d[c, j] <= r2:
                    covered[j] = 1
    return centers_arr[:nc].copy()
