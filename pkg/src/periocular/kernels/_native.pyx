# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot per-pixel kernels."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef int[8] _DR = [-1, -1, -1, 0, 1, 1, 1, 0]
cdef int[8] _DC = [-1, 0, 1, 1, 1, 0, -1, -1]


def lbp_codes(block):
    """8-bit local binary pattern code of every interior pixel."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] b = np.ascontiguousarray(block, dtype=np.float64)
    cdef Py_ssize_t h = b.shape[0], w = b.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] codes = np.zeros((h - 2, w - 2), dtype=np.uint8)
    cdef Py_ssize_t r, c, k
    cdef double center
    cdef unsigned char code
    for r in range(1, h - 1):
        for c in range(1, w - 1):
            center = b[r, c]
            code = 0
            for k in range(8):
                code <<= 1
                if b[r + _DR[k], c + _DC[k]] > center:
                    code |= 1
            codes[r - 1, c - 1] = code
    return codes


def svm_cd_epoch(double[:, ::1] X, double[::1] y, double[::1] alpha,
                 double[::1] w, double b, double C,
                 double[::1] q_diag, cnp.int64_t[::1] order):
    """One dual coordinate descent sweep; updates alpha and w in place.

    Returns the new bias term. ``order`` gives the coordinate visit order.
    """
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t k, i, j
    cdef double g, new_alpha, delta, yi, scale
    for k in range(order.shape[0]):
        i = order[k]
        yi = y[i]
        g = 0.0
        for j in range(d):
            g += X[i, j] * w[j]
        g = yi * (g + b) - 1.0
        if (alpha[i] <= 0.0 and g >= 0.0) or (alpha[i] >= C and g <= 0.0):
            continue
        new_alpha = alpha[i] - g / q_diag[i]
        if new_alpha < 0.0:
            new_alpha = 0.0
        elif new_alpha > C:
            new_alpha = C
        delta = new_alpha - alpha[i]
        if delta != 0.0:
            scale = delta * yi
            for j in range(d):
                w[j] += scale * X[i, j]
            b += scale
            alpha[i] = new_alpha
    return b


def glcm_counts(quantized, int levels, int dr, int dc):
    """Symmetric co-occurrence counts for one offset (dr, dc)."""
    cdef cnp.ndarray[cnp.int64_t, ndim=2] q = np.ascontiguousarray(quantized, dtype=np.int64)
    cdef Py_ssize_t h = q.shape[0], w = q.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] counts = np.zeros((levels, levels), dtype=np.float64)
    cdef Py_ssize_t r, c, r2, c2
    cdef cnp.int64_t a, b2
    for r in range(h):
        r2 = r + dr
        if r2 < 0 or r2 >= h:
            continue
        for c in range(w):
            c2 = c + dc
            if c2 < 0 or c2 >= w:
                continue
            a = q[r, c]
            b2 = q[r2, c2]
            counts[a, b2] += 1.0
            counts[b2, a] += 1.0
    return counts
