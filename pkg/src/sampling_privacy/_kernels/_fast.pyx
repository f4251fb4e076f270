# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled counting kernels. Same streams and outputs as ``_py``."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef double UNIT = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t x) noexcept nogil:
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL
    return x ^ (x >> 31)


cdef inline uint64_t derive(uint64_t key, uint64_t i) noexcept nogil:
    return mix64(key + (i + 1) * GAMMA)


cdef inline double unit(uint64_t w) noexcept nogil:
    return <double>(w >> 11) * UNIT


cdef inline Py_ssize_t face_of(const double[::1] cdf, double u) noexcept nogil:
    # first face with cdf[face] > u
    cdef Py_ssize_t lo = 0, hi = cdf.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cdf[mid] > u:
            hi = mid
        else:
            lo = mid + 1
    return lo


cdef inline Py_ssize_t aggregator(uint64_t assign_key, uint64_t i, uint64_t k) noexcept nogil:
    if k == 1:
        return 0
    return <Py_ssize_t>(derive(assign_key, i) % k)


def sp_counts(cdf, truths, uint64_t key, Py_ssize_t k, uint64_t assign_key):
    cdef const double[::1] c = np.ascontiguousarray(cdf, dtype=np.float64)
    cdef const int64_t[::1] t = np.ascontiguousarray(truths, dtype=np.int64)
    cdef Py_ssize_t width = c.shape[0] - 1
    out_arr = np.zeros((k, 2, width), dtype=np.int64)
    cdef int64_t[:, :, ::1] out = out_arr
    cdef Py_ssize_t i, n = t.shape[0], face, a
    cdef uint64_t okey
    with nogil:
        for i in range(n):
            a = aggregator(assign_key, <uint64_t>i, <uint64_t>k)
            okey = derive(key, <uint64_t>i)
            face = face_of(c, unit(derive(okey, 0)))
            if face == width:
                out[a, 0, 0] += 1
                out[a, 1, t[i]] += 1
            else:
                out[a, 0, face] += 1
                out[a, 1, face] += 1
    return out_arr


cdef inline int64_t rr_answer(int64_t truth, uint64_t okey, double pi1, double pi2,
                              uint64_t first) noexcept nogil:
    if unit(derive(okey, first)) < pi1:
        return truth
    return 1 if unit(derive(okey, first + 1)) < pi2 else 0


def rr_counts(truths, double pi1, double pi2, uint64_t key, Py_ssize_t k, uint64_t assign_key):
    cdef const int64_t[::1] t = np.ascontiguousarray(truths, dtype=np.int64)
    out_arr = np.zeros((k, 2), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    cdef Py_ssize_t i, n = t.shape[0], a
    with nogil:
        for i in range(n):
            a = aggregator(assign_key, <uint64_t>i, <uint64_t>k)
            out[a, rr_answer(t[i], derive(key, <uint64_t>i), pi1, pi2, 0)] += 1
    return out_arr


def toy_counts(truths, double pi_s, double pi1, double pi2, uint64_t key, Py_ssize_t k,
               uint64_t assign_key):
    cdef const int64_t[::1] t = np.ascontiguousarray(truths, dtype=np.int64)
    out_arr = np.zeros((k, 3), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    cdef Py_ssize_t i, n = t.shape[0], a
    cdef uint64_t okey
    with nogil:
        for i in range(n):
            a = aggregator(assign_key, <uint64_t>i, <uint64_t>k)
            okey = derive(key, <uint64_t>i)
            if unit(derive(okey, 0)) < pi_s:
                out[a, rr_answer(t[i], okey, pi1, pi2, 1)] += 1
            else:
                out[a, 2] += 1
    return out_arr
