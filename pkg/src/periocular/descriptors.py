"""Block-level texture descriptors and per-image feature assembly.

Five descriptors are supported (LBP, HOG, GABOR, GLCM, GIST); per-block
output sizes are 8/8/30/5/32. An image feature vector is the row-major
concatenation of its block descriptors; fusion concatenates whole image
vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndi

from . import kernels
from .errors import BlockTooSmallError, ShapeError
from .gabor import GaborBank, build_gabor_bank, gabor_at_points, gabor_mean_magnitudes
from .imgproc import RoiSpec, partition_blocks

DESCRIPTORS = ("LBP", "HOG", "GABOR", "GLCM", "GIST")
BLOCK_FEATURE_SIZES = {"LBP": 8, "HOG": 8, "GABOR": 30, "GLCM": 5, "GIST": 32}

GABOR_LAYOUT = (5, 6)
GIST_LAYOUT = (4, 8)
DEFAULT_GLCM_LEVELS = 8
# Distance-1 offsets (dr, dc) at 0/45/90/135 degrees.
GLCM_OFFSETS = ((0, 1), (-1, 1), (-1, 0), (-1, -1))
GIST_EPSILON = 0.01  # variance-normalization guard, on [0,1] intensities

HOG_BINS = 8
LBP_BINS = 8


@dataclass(frozen=True)
class FeatureVector:
    descriptor: str
    values: np.ndarray

    @property
    def dims(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class Glcm:
    """One normalized symmetric co-occurrence matrix."""

    levels: int
    matrix: np.ndarray  # (levels, levels), entries sum to 1


def _check_block(block: np.ndarray, min_side: int) -> np.ndarray:
    block = np.asarray(block, dtype=np.float64)
    if block.ndim != 2 or block.shape[0] != block.shape[1]:
        raise ShapeError(f"expected a square block, got shape {block.shape}")
    if block.shape[0] < min_side:
        raise BlockTooSmallError(f"block side {block.shape[0]} < minimum {min_side}")
    return block


def _l1_normalize(hist: np.ndarray) -> np.ndarray:
    total = hist.sum()
    return hist / total if total > 0 else hist


def lbp_block(block: np.ndarray) -> np.ndarray:
    """8-bin L1-normalized histogram of 8-bit LBP codes.

    Codes are built clockwise from the top-left neighbor (MSB first) and
    binned into 8 uniform ranges of 32 consecutive code values.
    """
    block = _check_block(block, 3)
    codes = kernels.lbp_codes(block)
    hist = np.bincount(codes.ravel() >> 5, minlength=LBP_BINS).astype(np.float64)
    return _l1_normalize(hist)


def hog_block(block: np.ndarray) -> np.ndarray:
    """8-bin magnitude-weighted histogram of unsigned gradient orientations.

    Central differences at interior pixels; orientations in [0, 180) split
    into 8 uniform bins; L1-normalized (all-zero gradients stay zero).
    """
    block = _check_block(block, 3)
    gx = (block[1:-1, 2:] - block[1:-1, :-2]) / 2.0
    gy = (block[2:, 1:-1] - block[:-2, 1:-1]) / 2.0
    mag = np.hypot(gx, gy)
    theta = np.mod(np.arctan2(gy, gx), np.pi)
    bins = np.minimum((theta / (np.pi / HOG_BINS)).astype(np.int64), HOG_BINS - 1)
    hist = np.bincount(bins.ravel(), weights=mag.ravel(), minlength=HOG_BINS)
    return _l1_normalize(hist)


def quantize_levels(block: np.ndarray, levels: int) -> np.ndarray:
    """Uniform quantization of [0, 255] intensities into integer levels."""
    q = np.floor(np.asarray(block, dtype=np.float64) * levels / 256.0).astype(np.int64)
    return np.clip(q, 0, levels - 1)


def glcm_block(block: np.ndarray, levels: int = DEFAULT_GLCM_LEVELS) -> list[Glcm]:
    """One normalized symmetric GLCM per offset (0/45/90/135 degrees)."""
    if levels < 2:
        raise ValueError("need at least 2 gray levels")
    block = _check_block(block, 2)
    q = quantize_levels(block, levels)
    out = []
    for dr, dc in GLCM_OFFSETS:
        counts = kernels.glcm_counts(q, levels, dr, dc)
        out.append(Glcm(levels=levels, matrix=counts / counts.sum()))
    return out


def glcm_features(matrices: list[Glcm]) -> np.ndarray:
    """(contrast, homogeneity, entropy, energy, autocorrelation), averaged.

    Level indices are 1-based; entropy uses log2 with 0*log 0 := 0.
    """
    if not matrices:
        raise ValueError("need at least one co-occurrence matrix")
    levels = matrices[0].levels
    if any(m.levels != levels for m in matrices):
        raise ShapeError("co-occurrence matrices differ in size")
    idx = np.arange(1, levels + 1, dtype=np.float64)
    di = idx[:, None] - idx[None, :]
    feats = np.zeros(5)
    for m in matrices:
        p = m.matrix
        nz = p[p > 0]
        feats += [
            np.sum(p * di * di),
            np.sum(p / (1.0 + np.abs(di))),
            -np.sum(nz * np.log2(nz)),
            np.sum(p * p),
            np.sum(p * idx[:, None] * idx[None, :]),
        ]
    return feats / len(matrices)


def gist_prefilter(block: np.ndarray, epsilon: float = GIST_EPSILON) -> np.ndarray:
    """Divisive local-variance normalization on [0,1]-scaled intensities."""
    x = np.asarray(block, dtype=np.float64) / 255.0
    sigma_w = block.shape[0] / 4.0
    mu = ndi.gaussian_filter(x, sigma_w, mode="reflect")
    var = ndi.gaussian_filter(x * x, sigma_w, mode="reflect") - mu * mu
    sd = np.sqrt(np.maximum(var, 0.0))
    return (x - mu) / (epsilon + sd)


def gist_block(block: np.ndarray, bank: GaborBank | None = None) -> np.ndarray:
    """Mean Gabor response magnitudes of the variance-normalized block."""
    block = _check_block(block, 3)
    if bank is None:
        bank = build_gabor_bank(*GIST_LAYOUT)
    if bank.layout != GIST_LAYOUT:
        raise ShapeError(f"GIST requires a {GIST_LAYOUT} bank, got {bank.layout}")
    v = gist_prefilter(block)
    return gabor_mean_magnitudes(v[None], bank)[0]


def _extract_gabor(roi: np.ndarray, grid, bank: GaborBank) -> np.ndarray:
    return gabor_at_points(roi, grid.centers(), bank).ravel()


def _extract_gist(roi: np.ndarray, grid, bank: GaborBank) -> np.ndarray:
    normalized = np.stack([gist_prefilter(b) for b in grid.blocks])
    return gabor_mean_magnitudes(normalized, bank).ravel()


def extract_features(roi: np.ndarray, descriptor: str, spec: RoiSpec,
                     block_size: int,
                     glcm_levels: int = DEFAULT_GLCM_LEVELS) -> FeatureVector:
    """Per-image feature vector: block descriptors concatenated row-major."""
    roi = np.asarray(roi, dtype=np.float64)
    if roi.shape != (spec.height, spec.width):
        raise ShapeError(f"ROI shape {roi.shape} != spec {(spec.height, spec.width)}")
    if descriptor not in DESCRIPTORS:
        raise ValueError(f"unknown descriptor {descriptor!r}")
    grid = partition_blocks(roi, block_size)

    if descriptor == "GABOR":
        values = _extract_gabor(roi, grid, build_gabor_bank(*GABOR_LAYOUT))
    elif descriptor == "GIST":
        values = _extract_gist(roi, grid, build_gabor_bank(*GIST_LAYOUT))
    else:
        per_block = {
            "LBP": lbp_block,
            "HOG": hog_block,
            "GLCM": lambda b: glcm_features(glcm_block(b, glcm_levels)),
        }[descriptor]
        values = np.concatenate([per_block(b) for b in grid.blocks])

    expected = len(grid.blocks) * BLOCK_FEATURE_SIZES[descriptor]
    assert values.size == expected
    return FeatureVector(descriptor=descriptor, values=values)


def fuse(features: list[FeatureVector]) -> FeatureVector:
    """Feature-level fusion by concatenation, in the given order."""
    if not features:
        raise ValueError("nothing to fuse")
    return FeatureVector(
        descriptor="FUSED",
        values=np.concatenate([f.values for f in features]),
    )
