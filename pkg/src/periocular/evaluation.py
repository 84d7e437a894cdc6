"""Leave-one-subject-out evaluation: folds, metrics, experiment driver.

Features are extracted once per frame (plus its horizontal mirror) and
reused across folds; each fold trains a fresh one-vs-one SVM on every
other subject's originals and mirrors, and tests on the held-out
subject's originals only. The confusion matrix pools all folds.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from .config import ExperimentConfig, combo_name
from .dataset import (CLASS_ORDER, FrameSample, NEUTRAL, ingest_dataset,
                      load_image, load_landmarks, select_all_frames)
from .descriptors import extract_features, fuse
from .imgproc import RoiSpec, mirror_horizontal, normalize_frame
from .svm import ovo_votes, predict_ovo, train_ovo

log = logging.getLogger(__name__)

REPORT_FORMAT_VERSION = 1


@dataclass
class ExperimentReport:
    config: dict
    combo: list
    classes: list
    confusion: np.ndarray
    predictions: list  # dicts: subject, sequence, frame, true, predicted, votes
    metrics: dict
    warnings: list = field(default_factory=list)


def ordered_classes(labels) -> list:
    """Observed labels in canonical order (neutral first, then expressions)."""
    present = set(labels)
    out = [c for c in CLASS_ORDER if c in present]
    out += sorted(present - set(CLASS_ORDER))
    return out


def loso_folds(samples: list[FrameSample]) -> list[tuple]:
    """One (subject, train_indices, test_indices) fold per labeled subject.

    Subjects contributing only neutral frames stay in every training set
    and are never tested.
    """
    if not samples:
        raise ValueError("no frames to fold")
    labeled_subjects = sorted({s.subject_id for s in samples if s.label != NEUTRAL})
    folds = []
    for subject in labeled_subjects:
        test = [i for i, s in enumerate(samples) if s.subject_id == subject]
        train = [i for i, s in enumerate(samples) if s.subject_id != subject]
        folds.append((subject, train, test))
    return folds


def augment_mirror(items: list[tuple]) -> list[tuple]:
    """Double a training set of (roi, label) pairs with horizontal mirrors.

    Applies to ROI images before feature extraction; test sets are never
    augmented.
    """
    return list(items) + [(mirror_horizontal(roi), label) for roi, label in items]


def compute_metrics(confusion: np.ndarray, classes: list) -> tuple[dict, list]:
    """Average / overall / minimum accuracy (percent) from pooled counts."""
    confusion = np.asarray(confusion, dtype=np.float64)
    row_sums = confusion.sum(axis=1)
    warnings = []
    recalls = {}
    for k, name in enumerate(classes):
        if row_sums[k] == 0:
            warnings.append(f"class {name!r} has no test samples; excluded from average/min")
            continue
        recalls[name] = confusion[k, k] / row_sums[k] * 100.0
    if not recalls:
        raise ValueError("confusion matrix has no populated rows")
    values = list(recalls.values())
    metrics = {
        "average_acc": float(np.mean(values)),
        "overall_acc": float(np.trace(confusion) / confusion.sum() * 100.0),
        "min_acc": float(min(values)),
        "per_class_acc": {name: float(v) for name, v in recalls.items()},
    }
    return metrics, warnings


def _roi_pair(sample: FrameSample, cfg: ExperimentConfig):
    img = load_image(sample.image_path)
    landmarks = load_landmarks(sample.landmark_path)
    roi = normalize_frame(img, landmarks, RoiSpec(cfg.roi),
                          clip_limit=cfg.clahe_clip, tile=cfg.clahe_tile)
    return roi, mirror_horizontal(roi)


def _combo_features(roi, combo, cfg: ExperimentConfig):
    spec = RoiSpec(cfg.roi)
    parts = [extract_features(roi, name, spec, cfg.block_size,
                              glcm_levels=cfg.glcm_levels) for name in combo]
    return parts[0].values if len(parts) == 1 else fuse(parts).values


def build_feature_table(samples: list[FrameSample], cfg: ExperimentConfig,
                        combo: list, jobs: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """(originals, mirrors) feature matrices, one row per selected frame."""

    def one(sample):
        roi, mirrored = _roi_pair(sample, cfg)
        return _combo_features(roi, combo, cfg), _combo_features(mirrored, combo, cfg)

    if jobs != 1:
        rows = Parallel(n_jobs=jobs)(delayed(one)(s) for s in samples)
    else:
        rows = [one(s) for s in samples]
    return (np.asarray([r[0] for r in rows]),
            np.asarray([r[1] for r in rows]))


def run_experiment(cfg: ExperimentConfig, combo: list | None = None,
                   jobs: int = 1,
                   feature_table: tuple | None = None,
                   samples: list | None = None) -> ExperimentReport:
    """Full LOSO experiment for one descriptor combination.

    ``feature_table`` / ``samples`` allow reuse of cached extraction output
    (e.g. the CLI's extract stage); when omitted everything is computed
    from the dataset root.
    """
    cfg.validate()
    combo = list(combo if combo is not None else cfg.descriptors[0])
    if samples is None:
        samples = select_all_frames(ingest_dataset(Path(cfg.dataset_root)))
    if feature_table is None:
        feature_table = build_feature_table(samples, cfg, combo, jobs=jobs)
    X, Xm = feature_table
    labels = np.asarray([s.label for s in samples])
    classes = ordered_classes(labels)
    class_index = {c: k for k, c in enumerate(classes)}
    folds = loso_folds(samples)
    log.info("running %d LOSO folds for %s", len(folds), combo_name(combo))

    def run_fold(fold_number, subject, train, test):
        assert not set(s.subject_id for i in test for s in [samples[i]]) & \
            set(samples[i].subject_id for i in train)
        X_train = np.concatenate([X[train], Xm[train]])
        y_train = np.concatenate([labels[train], labels[train]])
        model = train_ovo(X_train, y_train, C=cfg.svm_c, tol=cfg.svm_tol,
                          seed=cfg.seed + fold_number)
        predicted = predict_ovo(model, X[test])
        votes, _ = ovo_votes(model, X[test])
        rows = []
        for pos, idx in enumerate(test):
            s = samples[idx]
            rows.append({
                "subject": s.subject_id,
                "sequence": s.sequence_id,
                "frame": s.frame_index,
                "true": s.label,
                "predicted": predicted[pos],
                "votes": {c: float(v) for c, v in zip(model.classes, votes[pos])},
            })
        return rows

    if jobs != 1:
        fold_rows = Parallel(n_jobs=jobs)(
            delayed(run_fold)(k, subj, tr, te)
            for k, (subj, tr, te) in enumerate(folds))
    else:
        fold_rows = [run_fold(k, subj, tr, te)
                     for k, (subj, tr, te) in enumerate(folds)]

    predictions = [row for rows in fold_rows for row in rows]
    confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for row in predictions:
        confusion[class_index[row["true"]], class_index[row["predicted"]]] += 1
    metrics, warnings = compute_metrics(confusion, classes)
    for w in warnings:
        log.warning("%s", w)
    return ExperimentReport(
        config={**cfg.to_dict(), "report_format_version": REPORT_FORMAT_VERSION},
        combo=combo,
        classes=classes,
        confusion=confusion,
        predictions=predictions,
        metrics=metrics,
        warnings=warnings,
    )


def report_to_json(report: ExperimentReport) -> str:
    doc = {
        "config": report.config,
        "combo": report.combo,
        "classes": report.classes,
        "confusion": report.confusion.tolist(),
        "metrics": report.metrics,
        "predictions": report.predictions,
        "warnings": report.warnings,
    }
    return json.dumps(doc, sort_keys=True, indent=2)


def report_to_text(report: ExperimentReport) -> str:
    """Human-readable summary: metrics line plus a per-class accuracy table."""
    lines = [
        f"Combination: {combo_name(report.combo)}",
        "Average Acc.  Overall Acc.  Min Acc.",
        "{:>11.1f}%  {:>11.1f}%  {:>7.1f}%".format(
            report.metrics["average_acc"],
            report.metrics["overall_acc"],
            report.metrics["min_acc"],
        ),
        "",
        "Per-class accuracy (%, rows = true class):",
    ]
    header = " " * 10 + "".join(f"{c[:3].title():>7}" for c in report.classes)
    lines.append(header)
    row_sums = report.confusion.sum(axis=1)
    for k, name in enumerate(report.classes):
        if row_sums[k] == 0:
            cells = "".join(f"{'n/a':>7}" for _ in report.classes)
        else:
            cells = "".join(
                f"{100.0 * v / row_sums[k]:>7.1f}" for v in report.confusion[k])
        lines.append(f"{name.title():<10}{cells}")
    for w in report.warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def write_predictions_csv(report: ExperimentReport, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject", "sequence", "frame", "true", "predicted"]
                        + [f"votes_{c}" for c in report.classes])
        for row in report.predictions:
            writer.writerow([row["subject"], row["sequence"], row["frame"],
                             row["true"], row["predicted"]]
                            + [row["votes"].get(c, 0.0) for c in report.classes])


def summary_table(reports: list[ExperimentReport]) -> str:
    """Cross-combination summary shaped like a methods-vs-metrics table."""
    lines = [f"{'Method':<24}{'Average':>10}{'Overall':>10}{'Min':>10}"]
    for r in reports:
        lines.append("{:<24}{:>9.1f}%{:>9.1f}%{:>9.1f}%".format(
            combo_name(r.combo),
            r.metrics["average_acc"],
            r.metrics["overall_acc"],
            r.metrics["min_acc"],
        ))
    return "\n".join(lines) + "\n"
