"""Batch command-line interface.

Stages are file-separated so the expensive ones cache: ``preprocess``
writes normalized ROI images plus a manifest, ``extract`` turns cached
ROIs into feature CSVs, ``evaluate`` runs the LOSO experiments (reusing
cached features when they match the config), ``report`` re-renders the
human-readable tables from stored JSON reports.

Exit codes: 0 success, 2 config error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from . import evaluation
from .config import CONFIG_FORMAT_VERSION, ExperimentConfig, combo_name, load_config
from .dataset import FrameSample, ingest_dataset, select_all_frames
from .errors import ConfigError, DataError, PeriocularError
from .evaluation import (ExperimentReport, run_experiment, report_to_json,
                         report_to_text, summary_table, write_predictions_csv)
from .imgproc import RoiSpec, mirror_horizontal
from .descriptors import extract_features, fuse

log = logging.getLogger("periocular")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

MANIFEST_NAME = "manifest.csv"


def _roi_filename(sample: FrameSample) -> str:
    return f"{sample.subject_id}_{sample.sequence_id}_f{sample.frame_index:03d}.png"


def cmd_preprocess(cfg: ExperimentConfig, out: Path, jobs: int) -> int:
    samples = select_all_frames(ingest_dataset(Path(cfg.dataset_root)))
    roi_dir = out / "roi"
    roi_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for sample in samples:
        roi, _ = evaluation._roi_pair(sample, cfg)
        path = roi_dir / _roi_filename(sample)
        PILImage.fromarray(np.clip(np.rint(roi), 0, 255).astype(np.uint8)).save(path)
        rows.append([sample.subject_id, sample.sequence_id, sample.frame_index,
                     sample.label, str(path.relative_to(out))])
    with open(out / MANIFEST_NAME, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject_id", "sequence_id", "frame_index", "label", "roi_path"])
        writer.writerows(rows)
    log.info("wrote %d ROI images and %s", len(rows), out / MANIFEST_NAME)
    return EXIT_OK


def _read_manifest(out: Path) -> list[dict]:
    path = out / MANIFEST_NAME
    if not path.is_file():
        raise DataError(f"no manifest at {path}; run preprocess first")
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _sidecar(cfg: ExperimentConfig, descriptor: str) -> dict:
    return {
        "format_version": CONFIG_FORMAT_VERSION,
        "descriptor": descriptor,
        "roi": cfg.roi,
        "block_size": cfg.block_size,
        "clahe_clip": cfg.clahe_clip,
        "clahe_tile": cfg.clahe_tile,
        "gabor_f_max": cfg.gabor_f_max,
        "glcm_levels": cfg.glcm_levels,
    }


def _write_feature_csv(path: Path, rows: list[dict], matrix: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject_id", "sequence_id", "frame_index", "label"]
                        + [f"f{k}" for k in range(matrix.shape[1])])
        for row, values in zip(rows, matrix):
            writer.writerow([row["subject_id"], row["sequence_id"],
                             row["frame_index"], row["label"]]
                            + [f"{v:.9g}" for v in values])


def cmd_extract(cfg: ExperimentConfig, out: Path, jobs: int) -> int:
    rows = _read_manifest(out)
    spec = RoiSpec(cfg.roi)
    rois = []
    for row in rows:
        with PILImage.open(out / row["roi_path"]) as im:
            rois.append(np.asarray(im.convert("L"), dtype=np.float64))
    singles = sorted({name for combo in cfg.descriptors for name in combo})
    for name in singles:
        feats = np.asarray([
            extract_features(roi, name, spec, cfg.block_size,
                             glcm_levels=cfg.glcm_levels).values
            for roi in rois])
        mirrored = np.asarray([
            extract_features(mirror_horizontal(roi), name, spec, cfg.block_size,
                             glcm_levels=cfg.glcm_levels).values
            for roi in rois])
        _write_feature_csv(out / f"features_{name}.csv", rows, feats)
        _write_feature_csv(out / f"features_{name}_mirror.csv", rows, mirrored)
        (out / f"features_{name}.json").write_text(
            json.dumps(_sidecar(cfg, name), sort_keys=True, indent=2))
        log.info("extracted %s: %d images x %d dims", name, *feats.shape)
    return EXIT_OK


def _load_cached_features(cfg: ExperimentConfig, out: Path, combo: list):
    """(samples, X, Xm) from extract-stage CSVs, or None when absent/stale."""
    parts, parts_m, samples = [], [], None
    for name in combo:
        sidecar = out / f"features_{name}.json"
        csv_path = out / f"features_{name}.csv"
        mirror_path = out / f"features_{name}_mirror.csv"
        if not (sidecar.is_file() and csv_path.is_file() and mirror_path.is_file()):
            return None
        if json.loads(sidecar.read_text()) != _sidecar(cfg, name):
            return None

        def read(path):
            keys, matrix = [], []
            with open(path, newline="") as fh:
                reader = csv.reader(fh)
                header = next(reader)
                n_meta = 4
                for row in reader:
                    keys.append(tuple(row[:n_meta]))
                    matrix.append([float(v) for v in row[n_meta:]])
            return keys, np.asarray(matrix)

        keys, matrix = read(csv_path)
        keys_m, matrix_m = read(mirror_path)
        if keys != keys_m:
            return None
        if samples is None:
            samples = [FrameSample(subject_id=k[0], sequence_id=k[1],
                                   frame_index=int(k[2]), image_path=Path(),
                                   landmark_path=Path(), label=k[3])
                       for k in keys]
            sample_keys = keys
        elif keys != sample_keys:
            return None
        parts.append(matrix)
        parts_m.append(matrix_m)
    return samples, np.concatenate(parts, axis=1), np.concatenate(parts_m, axis=1)


def cmd_evaluate(cfg: ExperimentConfig, out: Path, jobs: int) -> int:
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for combo in cfg.descriptors:
        cached = _load_cached_features(cfg, out, combo)
        if cached is not None:
            samples, X, Xm = cached
            log.info("%s: using cached features from %s", combo_name(combo), out)
            report = run_experiment(cfg, combo, jobs=jobs,
                                    feature_table=(X, Xm), samples=samples)
        else:
            report = run_experiment(cfg, combo, jobs=jobs)
        _write_report(report, out)
        reports.append(report)
    (out / "summary.txt").write_text(summary_table(reports))
    print(summary_table(reports), end="")
    return EXIT_OK


def _write_report(report: ExperimentReport, out: Path) -> None:
    name = combo_name(report.combo)
    (out / f"report_{name}.json").write_text(report_to_json(report))
    (out / f"report_{name}.txt").write_text(report_to_text(report))
    write_predictions_csv(report, out / f"predictions_{name}.csv")
    log.info("%s: average %.1f%% overall %.1f%% min %.1f%%", name,
             report.metrics["average_acc"], report.metrics["overall_acc"],
             report.metrics["min_acc"])


def cmd_report(cfg: ExperimentConfig, out: Path, jobs: int) -> int:
    paths = sorted(out.glob("report_*.json"))
    if not paths:
        raise DataError(f"no report JSON files under {out}")
    reports = []
    for path in paths:
        doc = json.loads(path.read_text())
        report = ExperimentReport(
            config=doc["config"], combo=doc["combo"], classes=doc["classes"],
            confusion=np.asarray(doc["confusion"], dtype=np.int64),
            predictions=doc["predictions"], metrics=doc["metrics"],
            warnings=doc.get("warnings", []),
        )
        (out / f"report_{combo_name(report.combo)}.txt").write_text(report_to_text(report))
        reports.append(report)
    (out / "summary.txt").write_text(summary_table(reports))
    print(summary_table(reports), end="")
    return EXIT_OK


COMMANDS = {
    "preprocess": cmd_preprocess,
    "extract": cmd_extract,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perioc",
        description="Periocular expression recognition pipeline",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="YAML experiment config")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers")
    parser.add_argument("--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(Path(args.config))
        if args.seed is not None:
            cfg.seed = args.seed
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PeriocularError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - safety net
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
