"""Model persistence: a directory holding binary matrices and manifest.json."""
from __future__ import annotations

import json
from pathlib import Path

from .classify import MODES, ClassifierModel
from .data import load_matrix, save_matrix, write_text_atomic
from .errors import LRTError, MatrixFormatError
from .learn import LearnConfig, TransformModel

MANIFEST = "manifest.json"


class ManifestError(LRTError, ValueError):
    """A model directory whose manifest is missing or malformed."""


def _write_matrices(root: Path, prefix: str, mats) -> list[str]:
    names = []
    for i, M in enumerate(mats):
        name = f"{prefix}_{i}.lrtm"
        save_matrix(root / name, M, fmt="binary", transpose=False)
        names.append(name)
    return names


def _read_manifest(root: Path) -> dict:
    path = root / MANIFEST
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ManifestError(f"{path}: manifest not found") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ManifestError(f"{path}: manifest must be a JSON object")
    return doc


def _read_matrices(root: Path, names, key: str) -> list:
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise ManifestError(f"{root / MANIFEST}: '{key}' must be a list of file names")
    try:
        return [load_matrix(root / n, fmt="binary", transpose=False) for n in names]
    except (OSError, MatrixFormatError) as exc:
        raise ManifestError(f"{root / MANIFEST}: cannot load '{key}' matrices: {exc}") from exc


def save_transform(path, model: TransformModel):
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    doc = {
        "type": "transform",
        "kind": model.kind,
        "transforms": _write_matrices(root, "T", model.transforms),
        "config": model.config.to_dict(),
        "objective_trace": list(map(float, model.objective_trace)),
        "norm_trace": list(map(float, model.norm_trace)),
    }
    write_text_atomic(root / MANIFEST, json.dumps(doc, indent=2) + "\n")


def _transform_from(root: Path, doc: dict) -> TransformModel:
    kind = doc.get("kind")
    if kind not in ("global", "per-class"):
        raise ManifestError(f"{root / MANIFEST}: unknown transform kind {kind!r}")
    mats = _read_matrices(root, doc.get("transforms"), "transforms")
    if not mats:
        raise ManifestError(f"{root / MANIFEST}: no transform matrices listed")
    try:
        cfg = LearnConfig(**doc.get("config", {}))
    except TypeError as exc:
        raise ManifestError(f"{root / MANIFEST}: bad config ({exc})") from exc
    return TransformModel(kind, mats, list(doc.get("objective_trace", [])), cfg,
                          norm_trace=list(doc.get("norm_trace", [])))


def load_transform(path) -> TransformModel:
    root = Path(path)
    doc = _read_manifest(root)
    if doc.get("type") != "transform":
        raise ManifestError(f"{root / MANIFEST}: not a transform model")
    return _transform_from(root, doc)


def save_classifier(path, model: ClassifierModel):
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    doc = {
        "type": "classifier",
        "mode": model.mode,
        "sparsity": model.sparsity,
        "gamma": model.transform.config.gamma,
        "class_ids": list(model.class_ids),
        "kind": model.transform.kind,
        "transforms": _write_matrices(root, "T", model.transform.transforms),
        "config": model.transform.config.to_dict(),
        "bases": _write_matrices(root, "L", model.per_class_bases),
        "galleries": _write_matrices(root, "G", model.galleries),
    }
    write_text_atomic(root / MANIFEST, json.dumps(doc, indent=2) + "\n")


def load_classifier(path) -> ClassifierModel:
    root = Path(path)
    doc = _read_manifest(root)
    if doc.get("type") != "classifier":
        raise ManifestError(f"{root / MANIFEST}: not a classifier model")
    mode = doc.get("mode")
    if mode not in MODES:
        raise ManifestError(f"{root / MANIFEST}: unknown mode {mode!r}")
    transform = _transform_from(root, doc)
    sparsity = doc.get("sparsity")
    if not isinstance(sparsity, int) or sparsity < 1:
        raise ManifestError(f"{root / MANIFEST}: sparsity must be a positive integer")
    class_ids = doc.get("class_ids")
    if not isinstance(class_ids, list):
        raise ManifestError(f"{root / MANIFEST}: class_ids missing")
    bases = _read_matrices(root, doc.get("bases", []), "bases")
    galleries = _read_matrices(root, doc.get("galleries", []), "galleries")
    stored = bases if mode == "omp" else galleries
    if len(stored) != len(class_ids):
        raise ManifestError(f"{root / MANIFEST}: {len(stored)} class matrices for {len(class_ids)} classes")
    return ClassifierModel(transform, mode, sparsity, bases, galleries, [int(c) for c in class_ids])
