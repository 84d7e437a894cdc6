"""Experiment configuration: YAML schema, defaults, validation.

Schema (format_version 1)::

    format_version: 1
    dataset_root: path
    roi: small | large
    block_size: 16 | 32
    descriptors:            # each entry: one name or a fusion list
      - GABOR
      - [LBP, HOG, GLCM]
    svm_c: 1.0
    svm_tol: 1.0e-4
    clahe_clip: 2.0
    clahe_tile: 32
    gabor_f_max: 0.25
    glcm_levels: 8
    seed: 0
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .descriptors import DESCRIPTORS
from .errors import ConfigError

CONFIG_FORMAT_VERSION = 1


@dataclass
class ExperimentConfig:
    dataset_root: str
    roi: str = "large"
    block_size: int = 16
    descriptors: list = field(default_factory=lambda: [["GABOR"]])
    svm_c: float = 1.0
    svm_tol: float = 1e-4
    clahe_clip: float = 2.0
    clahe_tile: int = 32
    gabor_f_max: float = 0.25
    glcm_levels: int = 8
    seed: int = 0

    def validate(self) -> "ExperimentConfig":
        if self.roi not in ("small", "large"):
            raise ConfigError(f"roi must be small or large, got {self.roi!r}")
        if self.block_size not in (16, 32):
            raise ConfigError(f"block_size must be 16 or 32, got {self.block_size}")
        if not self.descriptors:
            raise ConfigError("descriptors list is empty")
        for combo in self.descriptors:
            for name in combo:
                if name not in DESCRIPTORS:
                    raise ConfigError(f"unknown descriptor {name!r}")
        if self.svm_c <= 0:
            raise ConfigError("svm_c must be positive")
        if self.clahe_clip < 1.0:
            raise ConfigError("clahe_clip must be >= 1.0")
        if self.glcm_levels < 2:
            raise ConfigError("glcm_levels must be >= 2")
        return self

    def to_dict(self) -> dict:
        return {"format_version": CONFIG_FORMAT_VERSION, **asdict(self)}


def _normalize_descriptors(raw) -> list:
    combos = []
    for entry in raw:
        if isinstance(entry, str):
            combos.append([entry.upper()])
        else:
            combos.append([str(name).upper() for name in entry])
    return combos


def load_config(path: Path) -> ExperimentConfig:
    try:
        doc = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} is not a mapping")
    version = doc.pop("format_version", CONFIG_FORMAT_VERSION)
    if version != CONFIG_FORMAT_VERSION:
        raise ConfigError(f"unsupported config format_version {version!r}")
    if "dataset_root" not in doc:
        raise ConfigError("config is missing dataset_root")
    if "descriptors" in doc:
        doc["descriptors"] = _normalize_descriptors(doc["descriptors"])
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**doc).validate()


def combo_name(combo: list) -> str:
    return "+".join(combo)
