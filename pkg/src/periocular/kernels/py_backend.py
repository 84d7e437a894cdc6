"""Vectorized numpy implementations of the hot kernels."""

import numpy as np

# 3x3 neighbor offsets clockwise from top-left; first offset is the most
# significant bit of the 8-bit code.
LBP_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))


def lbp_codes(block):
    """8-bit local binary pattern code of every interior pixel.

    Returns an (h-2, w-2) uint8 array; bit = 1 iff neighbor > center.
    """
    block = np.asarray(block, dtype=np.float64)
    h, w = block.shape
    center = block[1:h - 1, 1:w - 1]
    codes = np.zeros((h - 2, w - 2), dtype=np.uint8)
    for bit, (dr, dc) in enumerate(LBP_OFFSETS):
        nb = block[1 + dr:h - 1 + dr, 1 + dc:w - 1 + dc]
        codes |= (nb > center).astype(np.uint8) << (7 - bit)
    return codes


def svm_cd_epoch(X, y, alpha, w, b, C, q_diag, order):
    """One dual coordinate descent sweep; updates alpha and w in place.

    Returns the new bias term. ``order`` gives the coordinate visit order.
    """
    for i in order:
        g = y[i] * (X[i] @ w + b) - 1.0
        if (alpha[i] <= 0.0 and g >= 0.0) or (alpha[i] >= C and g <= 0.0):
            continue
        new_alpha = min(max(alpha[i] - g / q_diag[i], 0.0), C)
        delta = new_alpha - alpha[i]
        if delta != 0.0:
            w += delta * y[i] * X[i]
            b += delta * y[i]
            alpha[i] = new_alpha
    return b


def glcm_counts(quantized, levels, dr, dc):
    """Symmetric co-occurrence counts for one offset (dr, dc).

    ``quantized`` holds integer levels in [0, levels). Each ordered pair is
    counted in both directions, so the result is symmetric.
    """
    q = np.asarray(quantized, dtype=np.int64)
    h, w = q.shape
    r_lo, r_hi = max(0, -dr), min(h, h - dr)
    c_lo, c_hi = max(0, -dc), min(w, w - dc)
    a = q[r_lo:r_hi, c_lo:c_hi].ravel()
    b = q[r_lo + dr:r_hi + dr, c_lo + dc:c_hi + dc].ravel()
    counts = np.bincount(a * levels + b, minlength=levels * levels)
    counts = counts.reshape(levels, levels).astype(np.float64)
    return counts + counts.T
