# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend for packed hypervector words.

Same API and bit-exact results as _kernels_np; see that module for the
layout convention. Selected automatically by hdcx.backend when built.
"""

import numpy as np

from libc.stdint cimport int32_t, int64_t, uint8_t, uint64_t

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define HDCX_POPCOUNT64(x) __builtin_popcountll(x)
    #else
    static inline int HDCX_POPCOUNT64(unsigned long long x) {
        x = x - ((x >> 1) & 0x5555555555555555ULL);
        x = (x & 0x3333333333333333ULL) + ((x >> 2) & 0x3333333333333333ULL);
        x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0FULL;
        return (int)((x * 0x0101010101010101ULL) >> 56);
    }
    #endif
    """
    int HDCX_POPCOUNT64(uint64_t x) nogil


def hamming_words(const uint64_t[::1] a, const uint64_t[::1] b):
    """Number of differing bits between two packed vectors."""
    cdef Py_ssize_t i, w = a.shape[0]
    cdef int64_t total = 0
    with nogil:
        for i in range(w):
            total += HDCX_POPCOUNT64(a[i] ^ b[i])
    return total


def hamming_matrix(const uint64_t[:, ::1] x, const uint64_t[:, ::1] p):
    """(n, m) matrix of differing-bit counts between rows of x and p."""
    cdef Py_ssize_t n = x.shape[0], m = p.shape[0], w = x.shape[1]
    cdef Py_ssize_t i, j, k
    cdef int64_t acc
    out_arr = np.empty((n, m), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    with nogil:
        for i in range(n):
            for j in range(m):
                acc = 0
                for k in range(w):
                    acc += HDCX_POPCOUNT64(x[i, k] ^ p[j, k])
                out[i, j] = acc
    return out_arr


def bitsum_columns(const uint64_t[:, ::1] x, Py_ssize_t dim):
    """Per-position count of set bits across the n rows of x."""
    cdef Py_ssize_t n = x.shape[0], i, pos
    out_arr = np.zeros(dim, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    with nogil:
        for i in range(n):
            for pos in range(dim):
                out[pos] += (x[i, pos >> 6] >> (pos & 63)) & 1
    return out_arr


def add_bipolar(int32_t[::1] counts, const uint64_t[::1] words, int sign):
    """counts[i] += sign * (+1 if bit i clear else -1), in place."""
    cdef Py_ssize_t pos, dim = counts.shape[0]
    cdef int32_t s = sign
    cdef int32_t bit
    with nogil:
        for pos in range(dim):
            bit = <int32_t>((words[pos >> 6] >> (pos & 63)) & 1)
            counts[pos] += s - 2 * s * bit
    return None


def majority_pack(const int32_t[::1] counts, const uint64_t[::1] tie_words, Py_ssize_t dim):
    """Pack sign(counts) into words; zero counts take bits from tie_words."""
    cdef Py_ssize_t nwords = tie_words.shape[0], pos
    cdef uint64_t word, bit
    out_arr = np.zeros(nwords, dtype=np.uint64)
    cdef uint64_t[::1] out = out_arr
    with nogil:
        for pos in range(dim):
            if counts[pos] < 0:
                bit = 1
            elif counts[pos] > 0:
                bit = 0
            else:
                bit = (tie_words[pos >> 6] >> (pos & 63)) & 1
            out[pos >> 6] |= bit << (pos & 63)
    return out_arr
