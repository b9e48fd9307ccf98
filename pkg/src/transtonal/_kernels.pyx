# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled transform kernels; see ``_pykernels`` for the reference versions."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def analysis_step(const double[:, ::1] x, const double[::1] h, const double[::1] g):
    cdef Py_ssize_t batch = x.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t half = m // 2
    cdef Py_ssize_t taps = h.shape[0]
    cdef Py_ssize_t b, k, n, j
    cdef double sa, sd, v
    a_arr = np.empty((batch, half), dtype=np.float64)
    d_arr = np.empty((batch, half), dtype=np.float64)
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] d = d_arr
    with nogil:
        for b in range(batch):
            for k in range(half):
                sa = 0.0
                sd = 0.0
                j = (2 * k) % m
                for n in range(taps):
                    v = x[b, j]
                    sa = sa + h[n] * v
                    sd = sd + g[n] * v
                    j = j + 1
                    if j == m:
                        j = 0
                a[b, k] = sa
                d[b, k] = sd
    return a_arr, d_arr


def synthesis_step(const double[:, ::1] a, const double[:, ::1] d,
                   const double[::1] h, const double[::1] g):
    cdef Py_ssize_t batch = a.shape[0]
    cdef Py_ssize_t half = a.shape[1]
    cdef Py_ssize_t m = 2 * half
    cdef Py_ssize_t taps = h.shape[0]
    cdef Py_ssize_t b, k, n, j
    cdef double va, vd
    out_arr = np.zeros((batch, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for b in range(batch):
            for k in range(half):
                va = a[b, k]
                vd = d[b, k]
                j = (2 * k) % m
                for n in range(taps):
                    out[b, j] += h[n] * va + g[n] * vd
                    j = j + 1
                    if j == m:
                        j = 0
    return out_arr


def lapped_fold(const double[:, ::1] x, const double[::1] window, Py_ssize_t block):
    cdef Py_ssize_t batch = x.shape[0]
    cdef Py_ssize_t n = x.shape[1]
    cdef Py_ssize_t nblocks = n // block
    cdef Py_ssize_t q = block // 2
    cdef Py_ssize_t b, k, i, base, o
    out_arr = np.empty((batch, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for b in range(batch):
            for k in range(nblocks):
                base = k * block
                o = k * block
                for i in range(q):
                    # -c reversed - d
                    out[b, o + i] = (
                        -window[block + q - 1 - i] * x[b, (base + block + q - 1 - i) % n]
                        - window[block + q + i] * x[b, (base + block + q + i) % n]
                    )
                    # a - b reversed
                    out[b, o + q + i] = (
                        window[i] * x[b, (base + i) % n]
                        - window[block - 1 - i] * x[b, (base + block - 1 - i) % n]
                    )
    return out_arr


def lapped_unfold(const double[:, ::1] u, const double[::1] window, Py_ssize_t block):
    cdef Py_ssize_t batch = u.shape[0]
    cdef Py_ssize_t n = u.shape[1]
    cdef Py_ssize_t nblocks = n // block
    cdef Py_ssize_t q = block // 2
    cdef Py_ssize_t b, k, i, base, o
    cdef double u1, u2
    out_arr = np.zeros((batch, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for b in range(batch):
            for k in range(nblocks):
                base = k * block
                o = k * block
                for i in range(q):
                    u1 = u[b, o + i]
                    u2 = u[b, o + q + i]
                    out[b, (base + i) % n] += window[i] * u2
                    out[b, (base + block - 1 - i) % n] -= window[block - 1 - i] * u2
                    out[b, (base + block + q - 1 - i) % n] -= window[block + q - 1 - i] * u1
                    out[b, (base + block + q + i) % n] -= window[block + q + i] * u1
    return out_arr
