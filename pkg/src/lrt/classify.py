"""Classification on learned transforms: nearest neighbour and minimal
reconstruction error over per-class low-rank bases."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import LabeledDataset
from .decomp import omp, rpca
from .errors import DimensionError, ParameterError
from .learn import TransformModel, identity_transform

MODES = ("nn", "omp")


@dataclass
class ClassifierModel:
    transform: TransformModel
    mode: str
    sparsity: int = 10
    per_class_bases: list[np.ndarray] = field(default_factory=list)
    # nn mode: transformed training columns per class (one gallery per class)
    galleries: list[np.ndarray] = field(default_factory=list)
    class_ids: list[int] = field(default_factory=list)

    @property
    def num_classes(self) -> int:
        return len(self.class_ids)

    @property
    def in_dim(self) -> int:
        return self.transform.in_dim


def _class_transform(transform: TransformModel, c: int) -> np.ndarray:
    if transform.kind == "global":
        return transform.T
    return transform.transforms[c]


def train_classifier(train: LabeledDataset, transform: TransformModel | None = None, mode: str = "omp",
                     sparsity: int = 10, beta: float | None = None) -> ClassifierModel:
    """Build per-class galleries (nn) or RPCA low-rank bases (omp).

    With a per-class transform, class ``c`` is always represented through its
    own ``T_c``.
    """
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
    if sparsity < 1:
        raise ParameterError("sparsity must be >= 1")
    if transform is None:
        transform = identity_transform(train.dim)
    if transform.in_dim != train.dim:
        raise DimensionError(f"transform expects dimension {transform.in_dim}, data has {train.dim}")
    if transform.kind != "global" and len(transform.transforms) != train.num_classes:
        raise ParameterError(
            f"per-class transform has {len(transform.transforms)} classes, data has {train.num_classes}")

    model = ClassifierModel(transform, mode, sparsity, class_ids=list(range(train.num_classes)))
    for c in range(train.num_classes):
        Yc = train.class_data(c)
        if Yc.shape[1] == 0:
            raise ParameterError(f"training class {c} is empty")
        TYc = _class_transform(transform, c) @ Yc
        if mode == "omp":
            model.per_class_bases.append(rpca(TYc, beta=beta).L)
        else:
            model.galleries.append(TYc)
    return model


def _class_scores(model: ClassifierModel, y: np.ndarray) -> np.ndarray:
    scores = np.empty(model.num_classes)
    for c in range(model.num_classes):
        z = _class_transform(model.transform, c) @ y
        if model.mode == "nn":
            G = model.galleries[c]
            scores[c] = np.min(np.linalg.norm(G - z[:, None], axis=0))
        else:
            L = model.per_class_bases[c]
            if not np.any(L):
                scores[c] = np.linalg.norm(z)
                continue
            x = omp(z, L, min(model.sparsity, L.shape[1]))
            scores[c] = np.linalg.norm(z - L @ x)
    return scores


def classify_point(model: ClassifierModel, y) -> tuple[int, float]:
    """Return ``(class id, score)``; score is the nn distance or OMP residual.

    Ties go to the lowest class id.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.size != model.in_dim:
        raise DimensionError(f"query has dimension {y.size}, model expects {model.in_dim}")
    scores = _class_scores(model, y)
    c = int(np.argmin(scores))
    return model.class_ids[c], float(scores[c])


def predict(model: ClassifierModel, Y) -> tuple[np.ndarray, np.ndarray]:
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2 or Y.shape[0] != model.in_dim:
        raise DimensionError(f"data shape {Y.shape} incompatible with model dimension {model.in_dim}")
    pred = np.empty(Y.shape[1], dtype=np.int64)
    score = np.empty(Y.shape[1])
    for i in range(Y.shape[1]):
        pred[i], score[i] = classify_point(model, Y[:, i])
    return pred, score


def evaluate_accuracy(model: ClassifierModel, test: LabeledDataset) -> float:
    """Fraction of correctly labelled test points (nan for an empty test set)."""
    if test.num_points == 0:
        return float("nan")
    pred, _ = predict(model, test.Y)
    return float(np.mean(pred == test.labels))
