"""Robust sparse subspace clustering and the alternating LRSC framework.

R-SSC: RPCA low-rank recovery of the (transformed) points, a closed-form
locally linear code of every point over its K nearest low-rank neighbors,
affinity ``W = |X| + |X'|`` and normalized spectral clustering.

LRSC alternates clustering the transformed data with relearning the global
transform from the induced labels, until the partition stops changing.
"""
from __future__ import annotations

import itertools
import warnings
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.cluster import KMeans

from .data import LabeledDataset
from .decomp import rpca
from .errors import (
    DegenerateGeometryError,
    DimensionError,
    NumericalError,
    ParameterError,
)
from .learn import (
    LearnConfig,
    TransformModel,
    identity_transform,
    learn_global,
    per_class_nuclear_norms,
)
from .linalg import (
    fit_subspace_basis,
    nuclear_norm,
    numerical_rank,
    smallest_principal_angle,
)

ISOLATED_DEGREE = 1e-12


@dataclass
class AffinityMatrix:
    W: np.ndarray
    X: np.ndarray | None = None  # row i holds the code of point i

    def __post_init__(self):
        W = np.abs(np.asarray(self.W, dtype=np.float64))
        W = 0.5 * (W + W.T) if not np.array_equal(W, W.T) else W
        np.fill_diagonal(W, 0.0)
        self.W = W


@dataclass
class ClusteringResult:
    assignments: np.ndarray
    num_clusters: int
    objective_trace: list[float] = field(default_factory=list)
    per_cluster_nuclear_norms: list[float] = field(default_factory=list)
    empty_clusters: list[int] = field(default_factory=list)
    misclassification_trace: list[float] = field(default_factory=list)
    history: list[dict] = field(default_factory=list)
    converged: bool = True


@dataclass
class ClustererSpec:
    method: str = "rssc"
    K: int = 6
    beta: float | None = None
    params: dict = field(default_factory=dict)


# ---------------------------------------------------------------- coding

def lle_code(point, neighbors) -> np.ndarray:
    """Affine reconstruction weights of ``point`` over the K columns of ``neighbors``.

    Solves ``G w = 1`` with ``G`` the Gram matrix of neighbor offsets, adding
    ``1e-3 trace(G)/K`` to the diagonal when ``G`` is near singular, then
    normalizes so the weights sum to one.
    """
    point = np.asarray(point, dtype=np.float64).ravel()
    Ln = np.asarray(neighbors, dtype=np.float64)
    if Ln.ndim != 2 or Ln.shape[0] != point.size:
        raise DimensionError(f"neighbors shape {Ln.shape} incompatible with point of length {point.size}")
    K = Ln.shape[1]
    if K < 1:
        raise ParameterError("need at least one neighbor")
    offsets = Ln - point[:, None]
    G = offsets.T @ offsets
    if np.linalg.cond(G) > 1e10:
        tr = np.trace(G)
        G = G + (1e-3 * tr / K if tr > 0 else 1.0) * np.eye(K)
    w = np.linalg.solve(G, np.ones(K))
    total = w.sum()
    if abs(total) <= 1e-12:
        raise DegenerateGeometryError("locally linear weights sum to zero")
    return w / total


def rssc_affinity(TY, K: int = 6, beta: float | None = None) -> AffinityMatrix:
    TY = np.asarray(TY, dtype=np.float64)
    N = TY.shape[1]
    if not 1 <= K < N:
        raise ParameterError(f"K={K} must satisfy 1 <= K < N={N}")
    L = rpca(TY, beta).L
    sq_L = np.sum(L * L, axis=0)
    X = np.zeros((N, N))
    for i in range(N):
        y = TY[:, i]
        dist = sq_L - 2.0 * (y @ L) + y @ y
        dist[i] = np.inf
        nbrs = np.argsort(dist, kind="stable")[:K]
        X[i, nbrs] = lle_code(y, L[:, nbrs])
    return AffinityMatrix(np.abs(X) + np.abs(X.T), X)


# ------------------------------------------------------ spectral clustering

def spectral_embedding(W, C: int) -> np.ndarray:
    W = np.asarray(W, dtype=np.float64)
    deg = W.sum(axis=1)
    deg[deg <= 0] = ISOLATED_DEGREE
    d_isqrt = 1.0 / np.sqrt(deg)
    L_sym = np.eye(W.shape[0]) - d_isqrt[:, None] * W * d_isqrt[None, :]
    try:
        _, vecs = np.linalg.eigh(0.5 * (L_sym + L_sym.T))
    except np.linalg.LinAlgError as exc:
        raise NumericalError("eigensolver failed on the normalized Laplacian") from exc
    E = vecs[:, :C]
    norms = np.linalg.norm(E, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return E / norms


def kmeans(E, C: int, seed: int = 0) -> tuple[np.ndarray, float]:
    km = KMeans(n_clusters=C, init="k-means++", n_init=20, max_iter=300, random_state=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # duplicate-point convergence notices
        labels = km.fit_predict(E)
    return labels.astype(np.int64), float(km.inertia_)


def spectral_cluster(W, C: int, seed: int = 0) -> np.ndarray:
    W = W.W if isinstance(W, AffinityMatrix) else np.asarray(W, dtype=np.float64)
    N = W.shape[0]
    if not 1 <= C <= N:
        raise ParameterError(f"C={C} must be in [1, {N}]")
    if C == 1:
        return np.zeros(N, dtype=np.int64)
    if C == N:
        return np.arange(N, dtype=np.int64)
    labels, _ = kmeans(spectral_embedding(W, C), C, seed)
    return labels


def canonical_labels(assignments) -> np.ndarray:
    """Relabel clusters in order of first appearance, so equal partitions compare equal."""
    assignments = np.asarray(assignments)
    _, first, inverse = np.unique(assignments, return_index=True, return_inverse=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return rank[inverse].astype(np.int64)


def rssc(TY, C: int, K: int = 6, beta: float | None = None, seed: int = 0) -> ClusteringResult:
    TY = np.asarray(TY, dtype=np.float64)
    if C == 1:
        labels = np.zeros(TY.shape[1], dtype=np.int64)
    else:
        labels = spectral_cluster(rssc_affinity(TY, K, beta), C, seed)
    return ClusteringResult(labels, C, per_cluster_nuclear_norms=per_class_nuclear_norms(
        np.eye(TY.shape[0]), TY, labels, C), empty_clusters=_empty(labels, C))


# ---------------------------------------------------------- plugin registry

Clusterer = Callable[[np.ndarray, int, int], np.ndarray]
_CLUSTERERS: dict[str, Callable[..., Clusterer]] = {}


def register_clusterer(name: str, factory: Callable[..., Clusterer]):
    """Register ``factory(spec) -> fn(TY, C, seed) -> assignments`` under ``name``."""
    _CLUSTERERS[name] = factory


def _rssc_factory(spec: ClustererSpec) -> Clusterer:
    def run(TY, C, seed):
        return rssc(TY, C, spec.K, spec.beta, seed).assignments
    return run


register_clusterer("rssc", _rssc_factory)


def make_clusterer(spec: ClustererSpec) -> Clusterer:
    if spec.K < 1:
        raise ParameterError("K must be >= 1")
    try:
        factory = _CLUSTERERS[spec.method]
    except KeyError:
        raise ParameterError(f"unknown clusterer {spec.method!r}; known: {sorted(_CLUSTERERS)}") from None
    return factory(spec)


# ------------------------------------------------------------ evaluation

def misclassification_rate(assignments, ground_truth) -> float:
    """Fraction of points misplaced under the best bijective label matching."""
    a = np.asarray(assignments)
    b = np.asarray(ground_truth)
    if a.shape != b.shape:
        raise DimensionError(f"{a.size} assignments vs {b.size} ground-truth labels")
    if a.size == 0:
        return 0.0
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    confusion = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(confusion, (ai, bi), 1)
    rows, cols = linear_sum_assignment(confusion, maximize=True)
    return 1.0 - confusion[rows, cols].sum() / a.size


def lrsc_objective(T, assignments, Y, lam: float = 1.0) -> float:
    """Cluster deviation from each cluster's own span plus lam times the nuclear gap."""
    T = np.asarray(T, dtype=np.float64)
    TY = T @ np.asarray(Y, dtype=np.float64)
    assignments = np.asarray(assignments)
    deviation = 0.0
    sum_nuc = 0.0
    for c in np.unique(assignments):
        A = TY[:, assignments == c]
        if A.shape[1] == 0:
            continue
        U, s, _ = np.linalg.svd(A, full_matrices=False)
        r = int(np.sum(s > 1e-8 * s[0])) if s[0] > 0 else 0
        P = U[:, :r]
        R = A - P @ (P.T @ A)
        deviation += float(np.sum(R * R))
        sum_nuc += float(np.sum(s))
    return deviation + lam * (sum_nuc - nuclear_norm(TY))


def pairwise_smallest_angles(TY, assignments, C: int, dims=None) -> dict[tuple[int, int], float]:
    """Smallest principal angle between fitted cluster subspaces.

    Each cluster's dimension comes from ``dims`` or its numerical rank (at
    most ambient dim - 1, so distinct clusters can be compared).
    """
    TY = np.asarray(TY, dtype=np.float64)
    assignments = np.asarray(assignments)
    bases = {}
    for c in range(C):
        A = TY[:, assignments == c]
        if A.shape[1] == 0:
            continue
        k = dims[c] if dims is not None else max(1, min(numerical_rank(A, 1e-2), TY.shape[0] - 1))
        bases[c] = fit_subspace_basis(A, min(k, min(A.shape)))
    return {(i, j): smallest_principal_angle(bases[i], bases[j])
            for i, j in itertools.combinations(sorted(bases), 2)}


def _empty(labels, C):
    return [c for c in range(C) if not np.any(labels == c)]


# ------------------------------------------------------------------ LRSC

def lrsc(Y, C: int, clusterer: ClustererSpec | None = None, learn_cfg: LearnConfig | None = None,
         max_outer: int = 20, ground_truth=None, seed: int = 0,
         warm_restart: bool = True) -> tuple[ClusteringResult, TransformModel]:
    """Alternate clustering of ``T Y`` with relearning ``T`` from the induced labels.

    Stops when the partition repeats (compared after canonical relabeling) or
    after ``max_outer`` assignment stages.
    """
    Y = np.asarray(Y, dtype=np.float64)
    if max_outer < 1:
        raise ParameterError("max_outer must be >= 1")
    clusterer = clusterer or ClustererSpec()
    learn_cfg = learn_cfg or LearnConfig()
    run = make_clusterer(clusterer)
    model = identity_transform(Y.shape[0], learn_cfg.out_dim, learn_cfg.gamma)
    T = model.T

    result = ClusteringResult(np.zeros(Y.shape[1], dtype=np.int64), C, converged=False)
    previous = None
    for outer in range(1, max_outer + 1):
        TY = T @ Y
        labels = canonical_labels(run(TY, C, seed))
        empty = _empty(labels, C)
        if empty:
            labels = canonical_labels(run(TY, C, seed + 1))
            empty = _empty(labels, C)

        record = {
            "iteration": outer,
            "lrsc_objective": lrsc_objective(T, labels, Y, learn_cfg.lam),
            "per_cluster_nuclear_norms": per_class_nuclear_norms(T, Y, labels, C),
            "pairwise_angles": pairwise_smallest_angles(TY, labels, C),
            "empty_clusters": empty,
        }
        if ground_truth is not None:
            record["misclassification"] = misclassification_rate(labels, ground_truth)
            result.misclassification_trace.append(record["misclassification"])
        result.history.append(record)
        result.objective_trace.append(record["lrsc_objective"])
        result.assignments = labels
        result.per_cluster_nuclear_norms = record["per_cluster_nuclear_norms"]
        result.empty_clusters = empty

        if previous is not None and np.array_equal(labels, previous):
            result.converged = True
            break
        previous = labels
        if outer == max_outer:
            break
        induced = LabeledDataset(Y, labels)
        model = learn_global(induced, learn_cfg, warm_start=T if warm_restart else None)
        T = model.T
    return result, model
