"""Geometric and photometric normalization of periocular frames.

Pipeline order: rescale to a 100 px interocular distance, rotate the eye
line to horizontal, crop the region of interest, then CLAHE. Images are
2-D float64 arrays with intensities in [0, 255]; landmark coordinates are
(x, y) with x = column, y = row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndi

from .errors import DegenerateGeometryError, PartitionError

NUM_LANDMARKS = 68
# 0-based slices of the standard 68-point annotation: points 37-42 are the
# subject's right eye, 43-48 the left eye (1-based convention).
RIGHT_EYE = slice(36, 42)
LEFT_EYE = slice(42, 48)

TARGET_INTEROCULAR = 100.0
ROI_WIDTH = 224
# Vertical extent of the crop relative to the eye-center line:
# the small ROI is symmetric, the large one reaches up to the forehead.
ROI_VARIANTS = {
    "small": (64, 32, 32),   # height, above, below
    "large": (96, 64, 32),
}

DEFAULT_CLAHE_CLIP = 2.0
DEFAULT_CLAHE_TILE = 32


@dataclass(frozen=True)
class EyeGeometry:
    """Eye centers in (x, y) pixels, their distance, and the eye-line roll."""

    right_center: tuple[float, float]
    left_center: tuple[float, float]
    interocular: float
    roll_angle: float  # degrees, in (-90, 90]

    @property
    def midpoint(self) -> tuple[float, float]:
        rx, ry = self.right_center
        lx, ly = self.left_center
        return ((rx + lx) / 2.0, (ry + ly) / 2.0)


@dataclass(frozen=True)
class RoiSpec:
    """Region-of-interest geometry: 64x224 (small) or 96x224 (large)."""

    variant: str

    def __post_init__(self):
        if self.variant not in ROI_VARIANTS:
            raise ValueError(f"unknown ROI variant {self.variant!r}")

    @property
    def height(self) -> int:
        return ROI_VARIANTS[self.variant][0]

    @property
    def width(self) -> int:
        return ROI_WIDTH

    @property
    def above(self) -> int:
        return ROI_VARIANTS[self.variant][1]

    @property
    def below(self) -> int:
        return ROI_VARIANTS[self.variant][2]


@dataclass(frozen=True)
class BlockGrid:
    """Non-overlapping row-major tiling of an image."""

    rows: int
    cols: int
    block_size: int
    blocks: np.ndarray  # (rows*cols, block_size, block_size)

    def reassemble(self) -> np.ndarray:
        b = self.blocks.reshape(self.rows, self.cols, self.block_size, self.block_size)
        return b.transpose(0, 2, 1, 3).reshape(
            self.rows * self.block_size, self.cols * self.block_size
        )

    def centers(self) -> np.ndarray:
        """(x, y) pixel coordinates of each block center, row-major."""
        half = self.block_size // 2
        ys = np.arange(self.rows) * self.block_size + half
        xs = np.arange(self.cols) * self.block_size + half
        cx, cy = np.meshgrid(xs, ys)
        return np.stack([cx.ravel(), cy.ravel()], axis=1)


def validate_landmarks(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.shape != (NUM_LANDMARKS, 2):
        raise ValueError(f"expected {NUM_LANDMARKS} landmark points, got {points.shape}")
    if not np.all(np.isfinite(points)):
        raise ValueError("landmark coordinates must be finite")
    return points


def compute_eye_geometry(landmarks: np.ndarray) -> EyeGeometry:
    """Eye centers as centroids of the 6 eye landmarks, plus distance and roll."""
    points = validate_landmarks(landmarks)
    right = points[RIGHT_EYE].mean(axis=0)
    left = points[LEFT_EYE].mean(axis=0)
    dx, dy = left[0] - right[0], left[1] - right[1]
    interocular = math.hypot(dx, dy)
    if interocular < 1e-9:
        raise DegenerateGeometryError("eye centers coincide")
    roll = math.degrees(math.atan2(dy, dx))
    if roll <= -90.0:
        roll += 180.0
    elif roll > 90.0:
        roll -= 180.0
    return EyeGeometry(
        right_center=(float(right[0]), float(right[1])),
        left_center=(float(left[0]), float(left[1])),
        interocular=float(interocular),
        roll_angle=float(roll),
    )


def _apply_affine_xy(img: np.ndarray, a_xy: np.ndarray, shift_xy: np.ndarray,
                     out_shape: tuple[int, int]) -> np.ndarray:
    """Resample so that output point p maps to input a_xy @ p + shift_xy.

    The affine is given in (x, y) coordinates; scipy works in (row, col),
    so both axes are swapped here.
    """
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    a_rc = swap @ a_xy @ swap
    shift_rc = swap @ shift_xy
    out = ndi.affine_transform(
        img, a_rc, offset=shift_rc, output_shape=out_shape,
        order=3, mode="constant", cval=0.0,
    )
    return np.clip(out, 0.0, 255.0)


def normalize_geometry(img: np.ndarray, geom: EyeGeometry) -> tuple[np.ndarray, EyeGeometry]:
    """Rescale to 100 px interocular distance and level the eye line.

    Bicubic interpolation throughout; samples falling outside the source
    fill with 0. The returned geometry holds the transformed eye centers.
    """
    img = np.asarray(img, dtype=np.float64)
    scale = TARGET_INTEROCULAR / geom.interocular
    if not 0.05 <= scale <= 20.0:
        raise DegenerateGeometryError(
            f"implausible rescale factor {scale:.3g} (interocular {geom.interocular:.1f})"
        )
    phi = math.radians(geom.roll_angle)
    c, s = math.cos(phi), math.sin(phi)
    rot = np.array([[c, -s], [s, c]])  # forward rotation by +roll

    mid = np.array(geom.midpoint)
    mid_s = scale * mid
    # Output -> input map: undo the rotation about the scaled midpoint,
    # then undo the scaling.
    a_xy = rot / scale
    shift_xy = mid - a_xy @ mid_s

    h, w = img.shape
    out_shape = (max(1, round(h * scale)), max(1, round(w * scale)))
    out = _apply_affine_xy(img, a_xy, shift_xy, out_shape)

    def forward(p):
        p = np.asarray(p, dtype=np.float64)
        return rot.T @ (scale * p - mid_s) + mid_s

    right = forward(geom.right_center)
    left = forward(geom.left_center)
    new_geom = EyeGeometry(
        right_center=(float(right[0]), float(right[1])),
        left_center=(float(left[0]), float(left[1])),
        interocular=float(np.hypot(*(left - right))),
        roll_angle=float(math.degrees(math.atan2(left[1] - right[1], left[0] - right[0]))),
    )
    return out, new_geom


def extract_roi(img: np.ndarray, geom: EyeGeometry, spec: RoiSpec) -> np.ndarray:
    """Crop the periocular window around the eye midpoint, zero-padding overflow."""
    img = np.asarray(img, dtype=np.float64)
    mx, my = geom.midpoint
    col0 = round(mx) - spec.width // 2
    row0 = round(my) - spec.above
    out = np.zeros((spec.height, spec.width), dtype=np.float64)

    r_lo, r_hi = max(row0, 0), min(row0 + spec.height, img.shape[0])
    c_lo, c_hi = max(col0, 0), min(col0 + spec.width, img.shape[1])
    if r_lo < r_hi and c_lo < c_hi:
        out[r_lo - row0:r_hi - row0, c_lo - col0:c_hi - col0] = img[r_lo:r_hi, c_lo:c_hi]
    return out


def clahe(img: np.ndarray, clip_limit: float = DEFAULT_CLAHE_CLIP,
          tile: int = DEFAULT_CLAHE_TILE) -> np.ndarray:
    """Contrast-limited adaptive histogram equalization.

    Per-tile histograms are clipped at ``clip_limit`` times the uniform bin
    height, the excess is redistributed, and pixel mappings are bilinearly
    blended between the four surrounding tile centers. Edge tiles may be
    smaller than ``tile`` pixels.
    """
    if clip_limit < 1.0:
        raise ValueError("clip_limit must be >= 1.0")
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    levels = 256
    q = np.clip(np.rint(img), 0, 255).astype(np.int64)

    nty = max(1, math.ceil(h / tile))
    ntx = max(1, math.ceil(w / tile))
    ys = [min(i * tile, h) for i in range(nty + 1)]
    xs = [min(j * tile, w) for j in range(ntx + 1)]

    maps = np.empty((nty, ntx, levels), dtype=np.float64)
    cy = np.empty(nty)
    cx = np.empty(ntx)
    for i in range(nty):
        cy[i] = (ys[i] + ys[i + 1] - 1) / 2.0
        for j in range(ntx):
            cx[j] = (xs[j] + xs[j + 1] - 1) / 2.0
            patch = q[ys[i]:ys[i + 1], xs[j]:xs[j + 1]]
            n = patch.size
            hist = np.bincount(patch.ravel(), minlength=levels).astype(np.float64)
            clip = clip_limit * n / levels
            excess = np.maximum(hist - clip, 0.0).sum()
            hist = np.minimum(hist, clip) + excess / levels
            cdf = np.cumsum(hist)
            maps[i, j] = cdf / cdf[-1] * 255.0

    # Bilinear blend of the four surrounding tile mappings per pixel.
    rows = np.arange(h, dtype=np.float64)
    cols = np.arange(w, dtype=np.float64)
    iy = np.clip(np.searchsorted(cy, rows) - 1, 0, max(nty - 2, 0))
    ix = np.clip(np.searchsorted(cx, cols) - 1, 0, max(ntx - 2, 0))
    if nty > 1:
        wy = np.clip((rows - cy[iy]) / (cy[iy + 1] - cy[iy]), 0.0, 1.0)
    else:
        wy = np.zeros(h)
        iy = np.zeros(h, dtype=np.int64)
    if ntx > 1:
        wx = np.clip((cols - cx[ix]) / (cx[ix + 1] - cx[ix]), 0.0, 1.0)
    else:
        wx = np.zeros(w)
        ix = np.zeros(w, dtype=np.int64)

    iy0 = iy[:, None]
    iy1 = np.minimum(iy0 + 1, nty - 1)
    ix0 = ix[None, :]
    ix1 = np.minimum(ix0 + 1, ntx - 1)
    wy2 = wy[:, None]
    wx2 = wx[None, :]

    out = ((1 - wy2) * (1 - wx2) * maps[iy0, ix0, q]
           + (1 - wy2) * wx2 * maps[iy0, ix1, q]
           + wy2 * (1 - wx2) * maps[iy1, ix0, q]
           + wy2 * wx2 * maps[iy1, ix1, q])
    return np.clip(out, 0.0, 255.0)


def partition_blocks(img: np.ndarray, block_size: int) -> BlockGrid:
    """Tile the image into non-overlapping block_size squares, row-major."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    if block_size <= 0 or h % block_size or w % block_size:
        raise PartitionError(f"{block_size} px blocks do not tile a {h}x{w} image")
    rows, cols = h // block_size, w // block_size
    blocks = (img.reshape(rows, block_size, cols, block_size)
              .transpose(0, 2, 1, 3)
              .reshape(rows * cols, block_size, block_size))
    return BlockGrid(rows=rows, cols=cols, block_size=block_size, blocks=blocks)


def mirror_horizontal(img: np.ndarray) -> np.ndarray:
    """Reverse column order."""
    return np.asarray(img)[:, ::-1].copy()


def normalize_frame(img: np.ndarray, landmarks: np.ndarray, spec: RoiSpec,
                    clip_limit: float = DEFAULT_CLAHE_CLIP,
                    tile: int = DEFAULT_CLAHE_TILE) -> np.ndarray:
    """Full preprocessing: align, crop the ROI, and equalize."""
    geom = compute_eye_geometry(landmarks)
    aligned, geom = normalize_geometry(img, geom)
    roi = extract_roi(aligned, geom, spec)
    return clahe(roi, clip_limit=clip_limit, tile=tile)
