import math
from pathlib import Path

import numpy as np
import pytest
from PIL import Image as PILImage

# Frame geometry shared by the synthetic corpora: eyes 100 px apart, level,
# with enough margin for the large ROI crop.
FRAME_SHAPE = (160, 260)  # (height, width)
RIGHT_EYE_CENTER = (80.0, 100.0)
LEFT_EYE_CENTER = (180.0, 100.0)


def hexagon(cx, cy, r=5.0):
    return [(cx + r * math.cos(2 * math.pi * k / 6),
             cy + r * math.sin(2 * math.pi * k / 6)) for k in range(6)]


def make_landmarks(right=RIGHT_EYE_CENTER, left=LEFT_EYE_CENTER):
    """68 points whose eye centroids land exactly on the given centers."""
    pts = np.zeros((68, 2))
    pts[:, 0] = np.linspace(40, 220, 68)
    pts[:, 1] = np.linspace(60, 150, 68)
    pts[36:42] = hexagon(*right)
    pts[42:48] = hexagon(*left)
    return pts


def sinusoid_image(theta_deg, freq, phase=0.0, shape=FRAME_SHAPE, amplitude=100.0):
    h, w = shape
    y, x = np.mgrid[0:h, 0:w].astype(float)
    th = math.radians(theta_deg)
    u = x * math.cos(th) + y * math.sin(th)
    return 127.5 + amplitude * np.sin(2 * math.pi * freq * u + phase)


def write_frame(seq_dir: Path, index: int, img: np.ndarray,
                landmarks=None) -> None:
    seq_dir.mkdir(parents=True, exist_ok=True)
    arr = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    PILImage.fromarray(arr).save(seq_dir / f"frame{index:03d}.png")
    if landmarks is None:
        landmarks = make_landmarks()
    lines = "\n".join(f"{x:.6f} {y:.6f}" for x, y in landmarks)
    (seq_dir / f"frame{index:03d}.txt").write_text(lines + "\n")


def build_texture_corpus(root: Path, subjects: int, class_orientations: dict,
                         frames_per_seq: int = 4, freq: float = 1 / 8,
                         neutral_orientation: float = 0.0, seed: int = 7) -> Path:
    """Corpus where each expression class is an oriented sinusoid texture.

    Every subject gets one sequence per class; frame 1 carries the neutral
    texture, later frames the class texture, with subject-specific phase.
    """
    rng = np.random.default_rng(seed)
    for s in range(subjects):
        subject = f"S{s:03d}"
        phase = rng.uniform(0.0, 2 * math.pi)
        for q, (label, theta) in enumerate(sorted(class_orientations.items())):
            seq_dir = root / subject / f"{q:03d}"
            for f in range(1, frames_per_seq + 1):
                jitter = rng.uniform(-0.05, 0.05)
                theta_f = neutral_orientation if f == 1 else theta
                write_frame(seq_dir, f, sinusoid_image(theta_f, freq, phase + jitter))
            (seq_dir / "label.txt").write_text(label + "\n")
    return root


def build_plain_corpus(root: Path, spec: list, seed: int = 3) -> Path:
    """Corpus from (subject, sequence, n_frames, label-or-None) tuples."""
    rng = np.random.default_rng(seed)
    for subject, sequence, n_frames, label in spec:
        seq_dir = root / subject / sequence
        for f in range(1, n_frames + 1):
            img = rng.uniform(0, 255, FRAME_SHAPE)
            write_frame(seq_dir, f, img)
        if label is not None:
            (seq_dir / "label.txt").write_text(label + "\n")
    return root


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
