"""Linear soft-margin SVMs and one-vs-one multiclass voting.

The binary solver is dual coordinate descent on the L1-loss SVM
(hinge loss, squared-norm regularizer). The bias is folded into the
weight vector through a constant augmented feature, which makes each
coordinate update exact and the dual objective monotone. Training is
deterministic given a seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateTrainingError, ShapeError

MODEL_FORMAT_VERSION = 1

DEFAULT_C = 1.0
DEFAULT_TOL = 1e-4
DEFAULT_MAX_UPDATES = 10 ** 6
CONSTANT_DIM_EPS = 1e-12


@dataclass(frozen=True)
class Standardizer:
    """Per-dimension z-score statistics; near-constant dims pass through."""

    mean: np.ndarray
    scale: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale


def standardize_fit(X: np.ndarray) -> Standardizer:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("need a nonempty 2-D sample matrix")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    scale = np.where(std < CONSTANT_DIM_EPS, 1.0, std)
    return Standardizer(mean=mean, scale=scale)


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    labels: tuple  # (positive_label, negative_label)
    objective_trace: list = field(default_factory=list, repr=False)

    def decision(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights + self.bias


def train_binary(X: np.ndarray, y: np.ndarray, C: float = DEFAULT_C,
                 tol: float = DEFAULT_TOL, max_updates: int = DEFAULT_MAX_UPDATES,
                 seed: int = 0,
                 labels: tuple = (1, -1)) -> LinearModel:
    """Fit one binary SVM by dual coordinate descent.

    Minimizes 0.5*||w||^2 + C * sum(hinge) over the bias-augmented weight
    vector. Stops when the relative duality gap drops below ``tol`` or
    after ``max_updates`` coordinate updates. The per-epoch dual
    minimization objective (non-increasing) is recorded on the model.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if C <= 0 or tol <= 0:
        raise ValueError("C and tol must be positive")
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ShapeError("X and y disagree on sample count")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise DegenerateTrainingError("training labels are single-class")

    n, d = X.shape
    X = np.ascontiguousarray(X)
    rng = np.random.default_rng(seed)
    q_diag = np.einsum("ij,ij->i", X, X) + 1.0  # +1 for the bias feature
    alpha = np.zeros(n)
    w = np.zeros(d)
    b = 0.0
    trace = []
    updates = 0
    converged = False
    while updates < max_updates and not converged:
        order = rng.permutation(n).astype(np.int64)
        b = kernels.svm_cd_epoch(X, y, alpha, w, b, C, q_diag, order)
        updates += n
        reg = 0.5 * (w @ w + b * b)
        margins = 1.0 - y * (X @ w + b)
        primal = reg + C * np.sum(np.maximum(margins, 0.0))
        dual = alpha.sum() - reg
        trace.append(reg - alpha.sum())  # dual minimization objective
        converged = primal - dual <= tol * max(1.0, primal)
    return LinearModel(weights=w, bias=b, labels=labels, objective_trace=trace)


@dataclass
class OvoModel:
    """N(N-1)/2 binary models over standardized features, majority voting."""

    classes: list
    models: dict  # (label_i, label_j) -> LinearModel, i < j in class order
    standardizer: Standardizer

    @property
    def dims(self) -> int:
        return self.standardizer.mean.size


def train_ovo(X: np.ndarray, labels, C: float = DEFAULT_C, seed: int = 0,
              tol: float = DEFAULT_TOL,
              max_updates: int = DEFAULT_MAX_UPDATES) -> OvoModel:
    """Train one binary SVM per class pair on standardized features."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    classes = sorted(set(labels.tolist()))
    if len(classes) < 2:
        raise DegenerateTrainingError("need at least two classes")
    standardizer = standardize_fit(X)
    Xs = standardizer.apply(X)
    models = {}
    pair_index = 0
    for i, pos in enumerate(classes):
        for neg in classes[i + 1:]:
            mask = (labels == pos) | (labels == neg)
            y = np.where(labels[mask] == pos, 1.0, -1.0)
            models[(pos, neg)] = train_binary(
                Xs[mask], y, C=C, tol=tol, max_updates=max_updates,
                seed=seed + pair_index, labels=(pos, neg),
            )
            pair_index += 1
    return OvoModel(classes=classes, models=models, standardizer=standardizer)


def ovo_votes(model: OvoModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vote counts and summed |decision| per class: two (n, n_classes) arrays."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None]
    if X.shape[1] != model.dims:
        raise ShapeError(f"feature dims {X.shape[1]} != model dims {model.dims}")
    Xs = model.standardizer.apply(X)
    index = {c: k for k, c in enumerate(model.classes)}
    votes = np.zeros((len(X), len(model.classes)))
    strength = np.zeros_like(votes)
    for (pos, neg), m in model.models.items():
        d = m.decision(Xs)
        win = np.where(d >= 0, index[pos], index[neg])
        votes[np.arange(len(X)), win] += 1
        strength[:, index[pos]] += np.abs(d)
        strength[:, index[neg]] += np.abs(d)
    return votes, strength


def predict_ovo(model: OvoModel, X: np.ndarray) -> list:
    """Majority-vote labels; ties break by summed |decision|, then class order."""
    votes, strength = ovo_votes(model, X)
    out = []
    for v, s in zip(votes, strength):
        best = np.flatnonzero(v == v.max())
        if len(best) > 1:
            best = best[s[best] == s[best].max()]
        out.append(model.classes[best[0]])
    return out


def model_to_json(model: OvoModel) -> str:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "classes": model.classes,
        "standardizer": {
            "mean": model.standardizer.mean.tolist(),
            "scale": model.standardizer.scale.tolist(),
        },
        "models": [
            {
                "positive": pos,
                "negative": neg,
                "weights": m.weights.tolist(),
                "bias": m.bias,
            }
            for (pos, neg), m in sorted(model.models.items())
        ],
    }
    return json.dumps(doc, sort_keys=True)


def model_from_json(text: str) -> OvoModel:
    doc = json.loads(text)
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format {doc.get('format_version')!r}")
    models = {}
    for entry in doc["models"]:
        pos, neg = entry["positive"], entry["negative"]
        models[(pos, neg)] = LinearModel(
            weights=np.asarray(entry["weights"], dtype=np.float64),
            bias=float(entry["bias"]),
            labels=(pos, neg),
        )
    return OvoModel(
        classes=list(doc["classes"]),
        models=models,
        standardizer=Standardizer(
            mean=np.asarray(doc["standardizer"]["mean"], dtype=np.float64),
            scale=np.asarray(doc["standardizer"]["scale"], dtype=np.float64),
        ),
    )
