"""Dataset ingestion and frame selection.

Expected layout: ``root/<subject>/<sequence>/`` holding frame images
(PNG/JPEG), one landmark text file per frame (same stem, ``.txt``
extension, 68 "x y" lines), and an optional ``label.txt`` with the
expression word. Each labeled sequence contributes its first frame as
neutral plus its last three frames as the labeled expression.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .errors import DataError
from .imgproc import NUM_LANDMARKS

EXPRESSIONS = ("angry", "contempt", "disgust", "fear", "happy", "sad", "surprise")
NEUTRAL = "neutral"
CLASS_ORDER = (NEUTRAL,) + EXPRESSIONS

LABEL_FILENAME = "label.txt"
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
APEX_FRAMES = 3

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class Sequence:
    subject_id: str
    sequence_id: str
    frames: tuple  # of (image_path, landmark_path)
    label: str | None


@dataclass(frozen=True)
class FrameSample:
    """One selected frame: identity, source paths, and its assigned label."""

    subject_id: str
    sequence_id: str
    frame_index: int  # 1-based position within the sequence
    image_path: Path
    landmark_path: Path
    label: str


def load_image(path: Path) -> np.ndarray:
    """Load a PNG/JPEG as float64 luma in [0, 255]."""
    with PILImage.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64)
    return arr @ LUMA_WEIGHTS


def load_landmarks(path: Path) -> np.ndarray:
    """Parse a 68-line "x y" landmark file."""
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            parts = line.split()
            if len(parts) != 2:
                raise DataError(f"{path}: malformed landmark line {line!r}")
            rows.append([float(parts[0]), float(parts[1])])
    if len(rows) != NUM_LANDMARKS:
        raise DataError(f"{path}: expected {NUM_LANDMARKS} landmarks, found {len(rows)}")
    return np.asarray(rows, dtype=np.float64)


def _read_label(path: Path) -> str:
    text = path.read_text().strip().lower()
    if text not in EXPRESSIONS:
        raise DataError(f"{path}: unknown expression label {text!r}")
    return text


def ingest_dataset(root: Path) -> list[Sequence]:
    """Scan the corpus tree into sorted Sequence records."""
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"dataset root {root} is not a readable directory")
    sequences = []
    for subject_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for seq_dir in sorted(p for p in subject_dir.iterdir() if p.is_dir()):
            images = sorted(
                p for p in seq_dir.iterdir()
                if p.suffix.lower() in IMAGE_SUFFIXES
            )
            if not images:
                continue
            frames = []
            for img in images:
                lm = img.with_suffix(".txt")
                if not lm.is_file():
                    raise DataError(f"missing landmark file for frame {img}")
                frames.append((img, lm))
            label_path = seq_dir / LABEL_FILENAME
            label = _read_label(label_path) if label_path.is_file() else None
            sequences.append(Sequence(
                subject_id=subject_dir.name,
                sequence_id=seq_dir.name,
                frames=tuple(frames),
                label=label,
            ))
    sequences.sort(key=lambda s: (s.subject_id, s.sequence_id))
    return sequences


def select_frames(seq: Sequence) -> list[FrameSample]:
    """Neutral onset frame plus, for labeled sequences, the three apex frames."""

    def sample(pos: int, label: str) -> FrameSample:
        img, lm = seq.frames[pos]
        return FrameSample(
            subject_id=seq.subject_id,
            sequence_id=seq.sequence_id,
            frame_index=pos + 1,
            image_path=img,
            landmark_path=lm,
            label=label,
        )

    out = [sample(0, NEUTRAL)]
    if seq.label is not None:
        apex_start = max(1, len(seq.frames) - APEX_FRAMES)
        out.extend(sample(pos, seq.label) for pos in range(apex_start, len(seq.frames)))
    return out


def select_all_frames(sequences: list[Sequence]) -> list[FrameSample]:
    return [frame for seq in sequences for frame in select_frames(seq)]
