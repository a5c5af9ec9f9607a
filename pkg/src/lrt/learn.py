"""Learning low-rank linear transformations by projected subgradient descent.

Every learner minimizes a difference of nuclear norms

    sum_i ||T A_i||_*  -  sum_j w_j ||T B_j||_*     s.t.  ||T||_2 = gamma

where the ``A_i`` are per-class blocks and the ``B_j`` the blocks whose
nuclear norm should stay large. Each step moves against a subgradient and
rescales ``T`` back to spectral norm ``gamma``.
"""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import LabeledDataset
from .errors import DimensionError, NumericalError, ParameterError
from .linalg import nuclear_norm, nuclear_subdifferential, numerical_rank, spectral_norm

ONLINE_MODES = ("sequential", "summed")


@dataclass
class LearnConfig:
    gamma: float = 1.0
    step_size: float = 0.02
    iterations: int = 100
    out_dim: int | None = None
    lam: float = 1.0
    minibatches: int = 1
    seed: int = 0
    delta_rel: float = 1e-6
    dc_outer_iterations: int = 1
    online_mode: str = "sequential"

    def validate(self, d: int | None = None, n: int | None = None):
        if not self.gamma > 0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}")
        if not self.step_size > 0:
            raise ParameterError(f"step_size must be positive, got {self.step_size}")
        if self.iterations < 0:
            raise ParameterError("iterations must be >= 0")
        if not self.lam >= 0:
            raise ParameterError(f"lambda must be nonnegative, got {self.lam}")
        if self.minibatches < 1:
            raise ParameterError("minibatches must be >= 1")
        if not self.delta_rel > 0:
            raise ParameterError("delta_rel must be positive")
        if self.dc_outer_iterations < 1:
            raise ParameterError("dc_outer_iterations must be >= 1")
        if self.online_mode not in ONLINE_MODES:
            raise ParameterError(f"online_mode must be one of {ONLINE_MODES}")
        if self.out_dim is not None and self.out_dim < 1:
            raise ParameterError("out_dim must be >= 1")
        if d is not None and self.out_dim is not None and self.out_dim > d:
            raise ParameterError(f"out_dim {self.out_dim} exceeds data dimension {d}")
        if n is not None and self.minibatches > n:
            raise ParameterError(f"{self.minibatches} minibatches for {n} points")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TransformModel:
    kind: str  # "global" | "per-class"
    transforms: list[np.ndarray]
    objective_trace: list[float]
    config: LearnConfig
    norm_trace: list[float] = field(default_factory=list)
    outer_trace: list[float] = field(default_factory=list)
    class_traces: list[list[float]] = field(default_factory=list)

    @property
    def T(self) -> np.ndarray:
        if self.kind != "global":
            raise ParameterError("per-class model has no single transform")
        return self.transforms[0]

    @property
    def out_dim(self) -> int:
        return self.transforms[0].shape[0]

    @property
    def in_dim(self) -> int:
        return self.transforms[0].shape[1]


def identity_transform(d: int, out_dim: int | None = None, gamma: float = 1.0) -> TransformModel:
    T = gamma * np.eye(d)[: out_dim or d]
    return TransformModel("global", [T], [], LearnConfig(gamma=gamma, out_dim=out_dim))


# ------------------------------------------------------------ objectives

def _class_blocks(data: LabeledDataset, strict: bool = False) -> list[np.ndarray]:
    blocks = []
    for c in range(data.num_classes):
        Yc = data.class_data(c)
        if Yc.shape[1] == 0:
            if strict:
                raise ParameterError(f"class {c} is empty")
            continue
        blocks.append(Yc)
    return blocks


def _check_T(T, d):
    T = np.asarray(T, dtype=np.float64)
    if T.ndim != 2 or T.shape[1] != d:
        raise DimensionError(f"transform shape {T.shape} incompatible with data dimension {d}")
    return T


def objective_nuclear(T, data: LabeledDataset) -> float:
    """sum_c ||T Y_c||_* - ||T Y||_*, never below zero up to rounding."""
    T = _check_T(T, data.dim)
    blocks = _class_blocks(data, strict=True)
    return sum(nuclear_norm(T @ Yc) for Yc in blocks) - nuclear_norm(T @ data.Y)


def objective_rank(T, data: LabeledDataset, delta_rel: float = 1e-6) -> int:
    """Rank version of the objective; reporting only."""
    T = _check_T(T, data.dim)
    blocks = _class_blocks(data, strict=True)
    return sum(numerical_rank(T @ Yc, delta_rel) for Yc in blocks) - numerical_rank(T @ data.Y, delta_rel)


def _iter_seed(seed: int, it: int) -> int:
    return int(np.random.SeedSequence([seed, it]).generate_state(1)[0])


def _block_subgradient(T, blocks, seed, delta_rel):
    return sum(nuclear_subdifferential(T @ A, rng_seed=seed, delta_rel=delta_rel) @ A.T
               for A in blocks)


def subgradient_step_matrix(T, data: LabeledDataset, delta_rel: float = 1e-6, seed: int = 0) -> np.ndarray:
    """Subgradient of the global objective at ``T``.

    Every subdifferential evaluation in one step shares ``seed``.
    """
    T = _check_T(T, data.dim)
    blocks = _class_blocks(data)
    return (_block_subgradient(T, blocks, seed, delta_rel)
            - _block_subgradient(T, [data.Y], seed, delta_rel))


# ------------------------------------------------------------ the engine

@dataclass
class _Problem:
    convex: list[np.ndarray]
    concave: list[np.ndarray]
    concave_weight: float = 1.0

    def value(self, T) -> float:
        v = sum(nuclear_norm(T @ A) for A in self.convex)
        if self.concave_weight:
            v -= self.concave_weight * sum(nuclear_norm(T @ B) for B in self.concave)
        return v

    def concave_subgradient(self, T, seed, delta_rel):
        if not self.concave_weight:
            return 0.0
        return self.concave_weight * _block_subgradient(T, self.concave, seed, delta_rel)


def _project(T, gamma, it):
    if not np.all(np.isfinite(T)):
        raise NumericalError(f"non-finite transform at iteration {it}")
    norm = spectral_norm(T)
    if norm == 0:
        raise NumericalError(f"transform collapsed to zero at iteration {it}")
    return gamma * T / norm


def _minimize(T, problem: _Problem, cfg: LearnConfig, evaluate: Callable, it_offset: int = 0,
              trace=None, norms=None, outer=None):
    """Run ``cfg.dc_outer_iterations`` x ``cfg.iterations`` projected subgradient steps.

    With one outer iteration the concave subgradient is refreshed every step.
    With more, it is frozen for the whole outer iteration and the outer
    iterate is the inner iterate with the lowest convexified objective.
    """
    it = it_offset
    dc = cfg.dc_outer_iterations > 1
    for _ in range(cfg.dc_outer_iterations):
        if dc:
            frozen = problem.concave_subgradient(T, _iter_seed(cfg.seed, it), cfg.delta_rel)

            def surrogate(X, frozen=frozen):
                return sum(nuclear_norm(X @ A) for A in problem.convex) - float(np.sum(frozen * X))

            best_T, best_val = T, surrogate(T)
        for _ in range(cfg.iterations):
            seed = _iter_seed(cfg.seed, it)
            step = _block_subgradient(T, problem.convex, seed, cfg.delta_rel)
            step = step - (frozen if dc else problem.concave_subgradient(T, seed, cfg.delta_rel))
            it += 1
            T = _project(T - cfg.step_size * step, cfg.gamma, it)
            if trace is not None:
                trace.append(evaluate(T))
                norms.append(spectral_norm(T))
            if dc:
                val = surrogate(T)
                if val < best_val:
                    best_T, best_val = T, val
        if dc:
            T = best_T
        if outer is not None:
            outer.append(evaluate(T))
    return T, it


def _initial(d, cfg: LearnConfig, warm_start):
    if warm_start is not None:
        T = _check_T(warm_start, d).copy()
        if cfg.out_dim is not None and T.shape[0] != cfg.out_dim:
            raise DimensionError(f"warm start has {T.shape[0]} rows, out_dim is {cfg.out_dim}")
        return _project(T, cfg.gamma, 0)
    return cfg.gamma * np.eye(d)[: cfg.out_dim or d]


def _global_problem(data: LabeledDataset) -> _Problem:
    return _Problem(_class_blocks(data), [data.Y])


def learn_global(data: LabeledDataset, cfg: LearnConfig | None = None, warm_start=None) -> TransformModel:
    """One transform for all classes, minimizing sum_c ||T Y_c||_* - ||T Y||_*."""
    cfg = cfg or LearnConfig()
    cfg.validate(data.dim, data.num_points)
    problem = _global_problem(data)
    T = _initial(data.dim, cfg, warm_start)
    trace, norms = [problem.value(T)], [spectral_norm(T)]
    outer = [trace[0]]
    T, _ = _minimize(T, problem, cfg, problem.value, trace=trace, norms=norms, outer=outer)
    return TransformModel("global", [T], trace, cfg, norms, outer)


def learn_per_class(data: LabeledDataset, cfg: LearnConfig | None = None) -> TransformModel:
    """One transform per class c, minimizing ||T_c Y_c||_* - lam ||T_c Y_not_c||_*.

    Classes are trained independently with the same seed, so mirrored
    problems give mirrored transforms.
    """
    cfg = cfg or LearnConfig()
    cfg.validate(data.dim, data.num_points)
    if data.num_classes < 2:
        raise ParameterError("per-class learning needs at least two classes")
    transforms, class_traces = [], []
    for c in range(data.num_classes):
        mask = data.labels == c
        if not mask.any():
            raise ParameterError(f"class {c} is empty")
        problem = _Problem([data.Y[:, mask]], [data.Y[:, ~mask]], cfg.lam)
        T = _initial(data.dim, cfg, None)
        trace, norms = [problem.value(T)], [spectral_norm(T)]
        T, _ = _minimize(T, problem, cfg, problem.value, trace=trace, norms=norms)
        transforms.append(T)
        class_traces.append(trace)
    total = np.sum(np.array(class_traces), axis=0).tolist()
    norms = [max(spectral_norm(T) for T in transforms)] * len(total)
    return TransformModel("per-class", transforms, total, cfg, norms, class_traces=class_traces)


def minibatch_partition(n: int, batches: int, seed: int) -> list[np.ndarray]:
    """Seeded split of ``range(n)`` into ``batches`` disjoint, exhaustive parts."""
    if batches < 1 or batches > n:
        raise ParameterError(f"cannot split {n} points into {batches} minibatches")
    if batches == 1:
        return [np.arange(n)]
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(perm, batches)]


def learn_online(data: LabeledDataset, cfg: LearnConfig | None = None, warm_start=None) -> TransformModel:
    """Mini-batch learning.

    ``online_mode="sequential"`` learns on one batch at a time, each warm
    started from the previous batch's transform; ``"summed"`` takes one step
    per iteration along the sum of the per-batch subgradients. The recorded
    objective is always evaluated on the full dataset.
    """
    cfg = cfg or LearnConfig()
    cfg.validate(data.dim, data.num_points)
    parts = minibatch_partition(data.num_points, cfg.minibatches, cfg.seed)
    batches = [data.subset(idx) if len(parts) > 1 else data for idx in parts]
    full = _global_problem(data)
    T = _initial(data.dim, cfg, warm_start)
    trace, norms = [full.value(T)], [spectral_norm(T)]
    outer = [trace[0]]

    if cfg.online_mode == "summed":
        convex, concave = [], []
        for b in batches:
            convex.extend(_class_blocks(b))
            concave.append(b.Y)
        T, _ = _minimize(T, _Problem(convex, concave), cfg, full.value,
                         trace=trace, norms=norms, outer=outer)
    else:
        it = 0
        for b in batches:
            T, it = _minimize(T, _global_problem(b), cfg, full.value, it_offset=it,
                              trace=trace, norms=norms)
            outer.append(trace[-1])
    return TransformModel("global", [T], trace, cfg, norms, outer)


def learn(data: LabeledDataset, cfg: LearnConfig | None = None, mode: str = "global",
          warm_start=None) -> TransformModel:
    cfg = cfg or LearnConfig()
    if mode == "global":
        return learn_global(data, cfg, warm_start)
    if mode == "per-class":
        return learn_per_class(data, cfg)
    if mode == "online":
        return learn_online(data, cfg, warm_start)
    raise ParameterError(f"unknown learning mode {mode!r}")


def apply_transform(model: TransformModel, Y, class_id: int | None = None) -> np.ndarray:
    Y = np.asarray(Y, dtype=np.float64)
    if model.kind == "per-class":
        if class_id is None:
            raise ParameterError("per-class model needs a class_id")
        T = model.transforms[class_id]
    else:
        T = model.transforms[0]
    if Y.shape[0] != T.shape[1]:
        raise DimensionError(f"data dimension {Y.shape[0]} does not match transform input {T.shape[1]}")
    return T @ Y


def per_class_nuclear_norms(T, Y, labels, num_classes: int | None = None) -> list[float]:
    labels = np.asarray(labels)
    C = num_classes if num_classes is not None else int(labels.max()) + 1
    return [nuclear_norm(T @ Y[:, labels == c]) if np.any(labels == c) else 0.0 for c in range(C)]
