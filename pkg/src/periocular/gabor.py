"""Log-polar Gabor filter banks and response sampling.

Center frequencies are spaced one octave apart starting at ``f_max``;
orientations cover [0, 180) uniformly. Each mask is a complex Gabor with
an isotropic Gaussian envelope whose width gives roughly a one-octave
half-response bandwidth, truncated at +-3 sigma and corrected to zero mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# sigma * f for a ~1-octave half-response frequency bandwidth:
# sqrt(ln 2 / 2) * (2^b + 1) / ((2^b - 1) * pi) with b = 1.
BANDWIDTH_SIGMA = math.sqrt(math.log(2.0) / 2.0) * 3.0 / math.pi
DEFAULT_F_MAX = 0.25


@dataclass(frozen=True)
class GaborBank:
    """Complex filter masks, frequency-major over a (num_freq, num_orient) layout."""

    filters: tuple  # of complex 2-D arrays, odd square side
    frequencies: tuple  # cycles/pixel, one per frequency channel
    orientations: tuple  # degrees, one per orientation channel
    layout: tuple  # (num_freq, num_orient)

    def __len__(self) -> int:
        return len(self.filters)


def gabor_mask(frequency: float, orientation_deg: float) -> np.ndarray:
    """One complex Gabor mask, truncated at 3 sigma and DC-corrected."""
    sigma = BANDWIDTH_SIGMA / frequency
    half = math.ceil(3.0 * sigma)
    coords = np.arange(-half, half + 1, dtype=np.float64)
    x, y = np.meshgrid(coords, coords)
    theta = math.radians(orientation_deg)
    u = x * math.cos(theta) + y * math.sin(theta)
    envelope = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma))
    mask = envelope * np.exp(2j * math.pi * frequency * u)
    return mask - mask.mean()


@lru_cache(maxsize=8)
def build_gabor_bank(num_freq: int, num_orient: int,
                     f_max: float = DEFAULT_F_MAX) -> GaborBank:
    """Bank of num_freq x num_orient filters on the log-polar frequency grid."""
    if num_freq < 1 or num_orient < 1:
        raise ValueError("need at least one frequency and one orientation channel")
    if not 0.0 < f_max <= 0.5:
        raise ValueError(f"f_max {f_max} outside (0, 0.5]: would alias")
    frequencies = tuple(f_max / 2 ** k for k in range(num_freq))
    orientations = tuple(180.0 * k / num_orient for k in range(num_orient))
    filters = tuple(gabor_mask(f, o) for f in frequencies for o in orientations)
    return GaborBank(filters=filters, frequencies=frequencies,
                     orientations=orientations, layout=(num_freq, num_orient))


def _patch_at(img: np.ndarray, x: int, y: int, half: int) -> np.ndarray:
    """Square patch centered at (x, y), zero-padded outside the image."""
    h, w = img.shape
    side = 2 * half + 1
    patch = np.zeros((side, side), dtype=np.float64)
    r_lo, r_hi = max(0, y - half), min(h, y + half + 1)
    c_lo, c_hi = max(0, x - half), min(w, x + half + 1)
    if r_lo < r_hi and c_lo < c_hi:
        patch[r_lo - (y - half):r_hi - (y - half),
              c_lo - (x - half):c_hi - (x - half)] = img[r_lo:r_hi, c_lo:c_hi]
    return patch


def gabor_at_point(img: np.ndarray, point: tuple[int, int], bank: GaborBank) -> np.ndarray:
    """Response magnitudes of every bank filter at one (x, y) point."""
    img = np.asarray(img, dtype=np.float64)
    x, y = int(point[0]), int(point[1])
    if not (0 <= x < img.shape[1] and 0 <= y < img.shape[0]):
        raise ValueError(f"point {point} outside image {img.shape}")
    out = np.empty(len(bank), dtype=np.float64)
    for k, mask in enumerate(bank.filters):
        half = mask.shape[0] // 2
        patch = _patch_at(img, x, y, half)
        out[k] = abs(np.sum(mask * patch))
    return out


def gabor_at_points(img: np.ndarray, points: np.ndarray, bank: GaborBank) -> np.ndarray:
    """Response magnitudes at many points: (n_points, n_filters).

    Equivalent to calling :func:`gabor_at_point` per point, but batches the
    patch/filter inner products per frequency channel through one matmul.
    """
    img = np.asarray(img, dtype=np.float64)
    points = np.asarray(points, dtype=np.int64)
    n_freq, n_orient = bank.layout
    out = np.empty((len(points), len(bank)), dtype=np.float64)
    for fi in range(n_freq):
        masks = bank.filters[fi * n_orient:(fi + 1) * n_orient]
        side = masks[0].shape[0]
        half = side // 2
        padded = np.pad(img, half, mode="constant")
        # Real/imaginary parts stacked so the product stays in real BLAS.
        mats = np.empty((side * side, 2 * n_orient), dtype=np.float64)
        for oi, m in enumerate(masks):
            mats[:, 2 * oi] = m.real.ravel()
            mats[:, 2 * oi + 1] = m.imag.ravel()
        patches = np.empty((len(points), side * side), dtype=np.float64)
        for pi, (x, y) in enumerate(points):
            patches[pi] = padded[y:y + side, x:x + side].ravel()
        resp = patches @ mats
        out[:, fi * n_orient:(fi + 1) * n_orient] = np.hypot(
            resp[:, 0::2], resp[:, 1::2]
        )
    return out


def gabor_mean_magnitudes(blocks: np.ndarray, bank: GaborBank) -> np.ndarray:
    """Mean response magnitude of each filter convolved over each block.

    ``blocks`` is (n, side, side); convolution uses zero padding and the
    output is sampled over the block support only ('same'). Returns
    (n, n_filters).
    """
    blocks = np.asarray(blocks, dtype=np.float64)
    n, side, _ = blocks.shape
    out = np.empty((n, len(bank)), dtype=np.float64)
    n_freq, n_orient = bank.layout
    for fi in range(n_freq):
        masks = bank.filters[fi * n_orient:(fi + 1) * n_orient]
        k = masks[0].shape[0]
        full = side + k - 1
        lo = (k - 1) // 2
        fblocks = np.fft.fft2(blocks, s=(full, full))
        for oi, m in enumerate(masks):
            fmask = np.fft.fft2(m, s=(full, full))
            conv = np.fft.ifft2(fblocks * fmask[None])
            same = conv[:, lo:lo + side, lo:lo + side]
            out[:, fi * n_orient + oi] = np.abs(same).mean(axis=(1, 2))
    return out
