"""Datasets, file formats, synthetic subspace generators and splits.

Internally points are columns of ``Y`` (d x N). On disk every matrix file
stores one point per row, so load/save transpose at the boundary unless
``transpose=False`` is passed (used for transform matrices).
"""
from __future__ import annotations

import os
import struct
import tempfile
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionError, MatrixFormatError, ParameterError
from .linalg import SubspaceBasis

MAGIC = b"LRTM"
_HEADER = struct.Struct("<4sII")


def remap_labels(labels, warn: bool = True) -> np.ndarray:
    """Map arbitrary integer labels onto contiguous ids 0..C-1 (sorted order)."""
    labels = np.asarray(labels)
    if labels.size == 0:
        return labels.astype(np.int64)
    uniq, inverse = np.unique(labels, return_inverse=True)
    if warn and not np.array_equal(uniq, np.arange(uniq.size)):
        warnings.warn(f"labels {uniq.tolist()[:10]} are not contiguous from 0; remapped to 0..{uniq.size - 1}",
                      stacklevel=2)
    return inverse.astype(np.int64)


@dataclass
class LabeledDataset:
    """Points as columns of ``Y`` plus one integer class id per column."""

    Y: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        Y = np.asarray(self.Y, dtype=np.float64)
        if Y.ndim != 2 or Y.shape[0] < 1:
            raise DimensionError(f"Y must be d x N with d >= 1, got shape {Y.shape}")
        if not np.all(np.isfinite(Y)):
            raise ParameterError("Y has non-finite entries")
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.size != Y.shape[1]:
            raise DimensionError(f"{labels.size} labels for {Y.shape[1]} points")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.round(labels)):
                raise ParameterError("labels must be integers")
        self.Y = Y
        self.labels = remap_labels(labels.astype(np.int64), warn=True)

    @property
    def dim(self) -> int:
        return self.Y.shape[0]

    @property
    def num_points(self) -> int:
        return self.Y.shape[1]

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def class_data(self, c: int) -> np.ndarray:
        return self.Y[:, self.labels == c]

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledDataset(self.Y[:, idx], self.labels[idx])


# ---------------------------------------------------------------- file io

def _atomic_write(path, data: bytes):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text_atomic(path, text: str):
    _atomic_write(path, text.encode("utf-8"))


def _infer_format(path, fmt):
    if fmt is not None:
        if fmt not in ("csv", "binary"):
            raise ParameterError(f"unknown matrix format {fmt!r}")
        return fmt
    return "csv" if str(path).lower().endswith((".csv", ".txt")) else "binary"


def save_matrix(path, M, fmt: str | None = None, transpose: bool = True):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ParameterError("refusing to save non-finite entries")
    disk = M.T if transpose else M
    if _infer_format(path, fmt) == "csv":
        lines = [",".join(f"{v:.17g}" for v in row) for row in disk]
        write_text_atomic(path, "\n".join(lines) + "\n")
    else:
        rows, cols = disk.shape
        payload = np.ascontiguousarray(disk, dtype="<f8").tobytes()
        _atomic_write(path, _HEADER.pack(MAGIC, rows, cols) + payload)


def _parse_csv(path) -> np.ndarray:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values = [float(tok) for tok in line.split(",")]
            except ValueError as exc:
                raise MatrixFormatError(f"{path}:{lineno}: {exc}") from None
            if rows and len(values) != len(rows[0]):
                raise MatrixFormatError(
                    f"{path}:{lineno}: expected {len(rows[0])} fields, got {len(values)}")
            if not all(np.isfinite(values)):
                raise MatrixFormatError(f"{path}:{lineno}: non-finite entry")
            rows.append(values)
    if not rows:
        raise MatrixFormatError(f"{path}: empty matrix file")
    return np.array(rows, dtype=np.float64)


def _parse_binary(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise MatrixFormatError(
            f"{path}: header needs {_HEADER.size} bytes, file has {len(raw)}")
    magic, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise MatrixFormatError(f"{path}: bad magic {magic!r} at offset 0, expected {MAGIC!r}")
    expected = rows * cols * 8
    actual = len(raw) - _HEADER.size
    if actual != expected:
        raise MatrixFormatError(
            f"{path}: payload for {rows}x{cols} needs {expected} bytes, found {actual}")
    M = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(rows, cols).astype(np.float64)
    bad = np.argwhere(~np.isfinite(M))
    if bad.size:
        r, c = bad[0]
        raise MatrixFormatError(
            f"{path}: non-finite entry at offset {_HEADER.size + 8 * (r * cols + c)}")
    return M


def load_matrix(path, fmt: str | None = None, transpose: bool = True) -> np.ndarray:
    disk = _parse_csv(path) if _infer_format(path, fmt) == "csv" else _parse_binary(path)
    return disk.T.copy() if transpose else disk


def load_labels(path, remap: bool = True) -> np.ndarray:
    labels = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                labels.append(int(line))
            except ValueError:
                raise MatrixFormatError(f"{path}:{lineno}: not an integer label: {line!r}") from None
    labels = np.array(labels, dtype=np.int64)
    return remap_labels(labels) if remap else labels


def save_labels(path, labels):
    write_text_atomic(path, "".join(f"{int(v)}\n" for v in labels))


def load_dataset(matrix_path, labels_path) -> LabeledDataset:
    Y = load_matrix(matrix_path)
    labels = load_labels(labels_path)
    if labels.size != Y.shape[1]:
        raise DimensionError(f"{labels_path}: {labels.size} labels for {Y.shape[1]} points")
    return LabeledDataset(Y, labels)


# ------------------------------------------------------- synthetic data

@dataclass
class SyntheticSpec:
    """Union-of-subspaces fixture.

    ``angle`` places a second subspace at that smallest principal angle from
    the first (two-subspace fixtures only). ``max_pairwise_angle`` tilts the first
    basis vector of every subspace equally away from a shared anchor so those
    vectors are pairwise exactly that angle apart; every pairwise smallest
    principal angle is therefore at most that value. ``orthogonal`` draws
    mutually orthogonal subspaces from one random rotation. ``bases`` overrides
    all of these with explicit basis vectors (columns).
    """

    ambient_dim: int
    subspace_dims: list[int]
    points_per_subspace: int | list[int] = 200
    noise_sigma: float = 0.0
    outlier_fraction: float = 0.0
    angle: float | None = None
    max_pairwise_angle: float | None = None
    bases: list | None = field(default=None, repr=False)
    coefficient_range: tuple[float, float] = (-1.0, 1.0)
    orthogonal: bool = False

    def validate(self):
        if self.ambient_dim < 1:
            raise ParameterError("ambient_dim must be >= 1")
        if not self.subspace_dims:
            raise ParameterError("need at least one subspace")
        for k in self.subspace_dims:
            if not 1 <= k <= self.ambient_dim:
                raise ParameterError(f"subspace dim {k} not in [1, {self.ambient_dim}]")
        if not self.noise_sigma >= 0:
            raise ParameterError(f"invalid noise sigma {self.noise_sigma}")
        if not 0 <= self.outlier_fraction < 1:
            raise ParameterError(f"invalid outlier fraction {self.outlier_fraction}")
        counts = self.counts()
        if len(counts) != len(self.subspace_dims) or min(counts) < 1:
            raise ParameterError("points_per_subspace must give >= 1 point per subspace")
        if self.angle is not None:
            if len(self.subspace_dims) != 2:
                raise ParameterError("angle applies to two-subspace fixtures only")
            if not 0 <= self.angle <= np.pi / 2:
                raise ParameterError(f"angle {self.angle} outside [0, pi/2]")
            if sum(self.subspace_dims) > self.ambient_dim:
                raise ParameterError(
                    f"subspaces of dims {self.subspace_dims} intersect in R^{self.ambient_dim}; "
                    f"angle {self.angle} infeasible")
        if self.max_pairwise_angle is not None:
            if (self.ambient_dim < len(self.subspace_dims)
                    or not 0 < self.max_pairwise_angle <= np.pi / 2):
                raise ParameterError(f"infeasible max_pairwise_angle {self.max_pairwise_angle}")
        lo, hi = self.coefficient_range
        if not lo < hi:
            raise ParameterError(f"empty coefficient range {self.coefficient_range}")
        if self.orthogonal and sum(self.subspace_dims) > self.ambient_dim:
            raise ParameterError(
                f"{sum(self.subspace_dims)} basis vectors cannot be mutually orthogonal in R^{self.ambient_dim}")
        if self.bases is not None and len(self.bases) != len(self.subspace_dims):
            raise ParameterError("bases must match subspace_dims")

    def counts(self) -> list[int]:
        n = self.points_per_subspace
        if isinstance(n, (list, tuple)):
            return [int(v) for v in n]
        return [int(n)] * len(self.subspace_dims)


def _orth(M):
    Q, _ = np.linalg.qr(M)
    return Q


def _simplex_coords(C: int) -> np.ndarray:
    """C unit vectors in R^(C-1) with pairwise inner product -1/(C-1)."""
    if C == 1:
        return np.zeros((0, 1))
    centered = np.eye(C) - 1.0 / C
    U, _, _ = np.linalg.svd(centered)
    V = U[:, :C - 1].T @ centered
    return V / np.linalg.norm(V, axis=0)


def _make_bases(spec: SyntheticSpec, rng) -> list[np.ndarray]:
    d = spec.ambient_dim
    if spec.bases is not None:
        out = []
        for k, b in zip(spec.subspace_dims, spec.bases, strict=False):
            b = np.asarray(b, dtype=np.float64).reshape(d, -1)
            if b.shape[1] != k:
                raise ParameterError(f"basis has {b.shape[1]} columns, expected {k}")
            out.append(_orth(b))
        return out

    if spec.orthogonal:
        Q = _orth(rng.standard_normal((d, d)))
        edges = np.cumsum([0] + list(spec.subspace_dims))
        return [Q[:, a:b] for a, b in zip(edges[:-1], edges[1:], strict=False)]

    if spec.angle is not None:
        k1, k2 = spec.subspace_dims
        Q = _orth(rng.standard_normal((d, d)))
        # second subspace: first vector rotated by `angle` from the first subspace
        B1 = Q[:, :k1]
        first = np.cos(spec.angle) * Q[:, 0] + np.sin(spec.angle) * Q[:, k1]
        rest = Q[:, k1 + 1:k1 + k2]
        B2 = np.column_stack([first, rest]) if k2 > 1 else first[:, None]
        return [B1, _orth(B2)]

    if spec.max_pairwise_angle is not None:
        C = len(spec.subspace_dims)
        Q = _orth(rng.standard_normal((d, d)))
        anchor = Q[:, 0]
        # regular simplex directions orthogonal to the anchor: pairwise inner product -1/(C-1)
        simplex = Q[:, 1:C] @ _simplex_coords(C)
        cos_t = np.cos(spec.max_pairwise_angle)
        cos_h = np.sqrt(((C - 1) * cos_t + 1) / C)
        sin_h = np.sqrt(1 - cos_h ** 2)
        out = []
        for c, k in enumerate(spec.subspace_dims):
            first = cos_h * anchor + sin_h * simplex[:, c]
            M = np.column_stack([first, rng.standard_normal((d, k - 1))])
            out.append(_orth(M))
        return out

    return [_orth(rng.standard_normal((d, k))) for k in spec.subspace_dims]


def generate_synthetic(spec: SyntheticSpec, seed: int = 0):
    """Sample a labeled union of subspaces.

    Returns ``(dataset, bases)`` where ``bases`` are the true SubspaceBasis
    objects. Coefficients are uniform on ``spec.coefficient_range`` (default
    [-1, 1]) in each basis.
    """
    spec.validate()
    rng = np.random.default_rng(seed)
    bases = _make_bases(spec, rng)
    blocks, labels = [], []
    for c, (B, n) in enumerate(zip(bases, spec.counts(), strict=False)):
        coef = rng.uniform(*spec.coefficient_range, size=(B.shape[1], n))
        blocks.append(B @ coef)
        labels.append(np.full(n, c, dtype=np.int64))
    Y = np.hstack(blocks)
    labels = np.concatenate(labels)
    if spec.noise_sigma > 0:
        Y = Y + spec.noise_sigma * rng.standard_normal(Y.shape)
    n_out = int(round(spec.outlier_fraction * Y.shape[1]))
    if n_out:
        idx = np.sort(rng.choice(Y.shape[1], size=n_out, replace=False))
        radius = np.max(np.linalg.norm(Y, axis=0))
        direction = rng.standard_normal((Y.shape[0], n_out))
        direction /= np.linalg.norm(direction, axis=0)
        r = radius * rng.uniform(0, 1, n_out) ** (1.0 / Y.shape[0])
        Y[:, idx] = direction * r
    return LabeledDataset(Y, labels), [SubspaceBasis(B) for B in bases]


def two_lines(angle: float, n: int = 200, sigma: float = 0.0, seed: int = 0,
              coefficient_range=(-1.0, 1.0)):
    """Two lines through the origin of R^2 at ``angle``; first line along e1."""
    bases = [np.array([[1.0], [0.0]]), np.array([[np.cos(angle)], [np.sin(angle)]])]
    spec = SyntheticSpec(2, [1, 1], n, sigma, bases=bases, coefficient_range=coefficient_range)
    return generate_synthetic(spec, seed)


def three_lines(n: int = 200, sigma: float = 0.0, seed: int = 0):
    """Three lines in R^3 with pairwise angles pi/4, pi/4, pi/3."""
    c = np.cos(np.pi / 4)
    bases = [np.array([[1.0], [0.0], [0.0]]), np.array([[c], [c], [0.0]]), np.array([[c], [0.0], [c]])]
    spec = SyntheticSpec(3, [1, 1, 1], n, sigma, bases=bases)
    return generate_synthetic(spec, seed)


def rms_deviation(Y, basis) -> float:
    """Root mean square distance of the columns of ``Y`` from span(basis)."""
    B = basis.basis if isinstance(basis, SubspaceBasis) else _orth(np.asarray(basis, dtype=np.float64))
    R = Y - B @ (B.T @ Y)
    return float(np.sqrt(np.mean(np.sum(R * R, axis=0))))


def split_dataset(data: LabeledDataset, train_fraction: float, seed: int = 0):
    """Stratified, seeded split into ``(train, test)``."""
    if not 0 <= train_fraction <= 1:
        raise ParameterError(f"train_fraction {train_fraction} outside [0, 1]")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for c in range(data.num_classes):
        idx = np.flatnonzero(data.labels == c)
        if 0 < train_fraction < 1 and idx.size < 2:
            raise ParameterError(f"class {c} has {idx.size} point(s); too small to stratify")
        idx = rng.permutation(idx)
        n_train = int(round(train_fraction * idx.size))
        train_idx.append(idx[:n_train])
        test_idx.append(idx[n_train:])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    return _subset_raw(data, train_idx), _subset_raw(data, test_idx)


def _subset_raw(data, idx):
    # keeps the parent's class ids even when a class is absent from the subset
    out = object.__new__(LabeledDataset)
    out.Y = data.Y[:, idx]
    out.labels = data.labels[idx]
    return out


def stack_datasets(parts: Sequence[LabeledDataset]) -> LabeledDataset:
    return LabeledDataset(np.hstack([p.Y for p in parts]), np.concatenate([p.labels for p in parts]))
