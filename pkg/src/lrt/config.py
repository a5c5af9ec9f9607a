"""JSON run configuration shared by the command-line tools.

A config document has optional sections ``learn``, ``cluster``, ``synth``,
``classify`` and ``io`` plus a root ``seed``. Unknown keys anywhere are
rejected. Component seeds derive from the root seed by fixed offsets
(``SEED_OFFSETS``); an explicit ``learn.seed`` wins.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .cluster import ClustererSpec
from .data import SyntheticSpec
from .errors import LRTError, ParameterError
from .learn import LearnConfig

DEFAULT_SEED = 42
SEED_OFFSETS = {"synth": 0, "learn": 1, "cluster": 2, "split": 3, "classify": 4}


class ConfigError(LRTError, ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass
class ClassifyConfig:
    mode: str = "omp"
    sparsity: int = 10
    beta: float | None = None
    transform: str = "global"  # global | per-class | none


@dataclass
class IOConfig:
    data: str | None = None
    labels: str | None = None
    model: str | None = None
    out: str | None = None


@dataclass
class RunConfig:
    seed: int = DEFAULT_SEED
    learn: LearnConfig = field(default_factory=lambda: LearnConfig(seed=DEFAULT_SEED + SEED_OFFSETS["learn"]))
    cluster: ClustererSpec = field(default_factory=ClustererSpec)
    synth: dict | None = None
    classify: ClassifyConfig = field(default_factory=ClassifyConfig)
    io: IOConfig = field(default_factory=IOConfig)

    def derived_seed(self, component: str) -> int:
        return self.seed + SEED_OFFSETS[component]

    def synthetic_spec(self) -> SyntheticSpec:
        if self.synth is None:
            raise ConfigError("config has no 'synth' section")
        return _build(SyntheticSpec, self.synth, "synth")


def _build(cls, doc, section: str):
    if not isinstance(doc, dict):
        raise ConfigError(f"section '{section}' must be a JSON object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(doc) - names)
    if unknown:
        raise ConfigError(f"unknown key(s) in '{section}': {', '.join(unknown)}")
    try:
        return cls(**doc)
    except TypeError as exc:
        raise ConfigError(f"section '{section}': {exc}") from exc


def parse_config(doc: dict) -> RunConfig:
    """Validate a decoded JSON document into a RunConfig."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    known = {"seed", "learn", "cluster", "synth", "classify", "io"}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    seed = doc.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {seed!r}")

    learn_doc = doc.get("learn", {})
    learn = _build(LearnConfig, learn_doc, "learn")
    if "seed" not in learn_doc:
        learn.seed = seed + SEED_OFFSETS["learn"]
    cluster = _build(ClustererSpec, doc.get("cluster", {}), "cluster")
    classify = _build(ClassifyConfig, doc.get("classify", {}), "classify")
    io = _build(IOConfig, doc.get("io", {}), "io")
    synth = doc.get("synth")
    if synth is not None:
        _build(SyntheticSpec, synth, "synth")

    cfg = RunConfig(seed, learn, cluster, synth, classify, io)
    try:
        learn.validate()
        if cluster.K < 1:
            raise ParameterError("K must be >= 1")
        if cluster.beta is not None and not cluster.beta > 0:
            raise ParameterError("beta must be positive")
        if classify.mode not in ("nn", "omp"):
            raise ParameterError(f"classify mode must be 'nn' or 'omp', got {classify.mode!r}")
        if classify.sparsity < 1:
            raise ParameterError("sparsity must be >= 1")
        if classify.transform not in ("global", "per-class", "none"):
            raise ParameterError(f"unknown classify transform {classify.transform!r}")
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def read_config_doc(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def load_config(path, seed: int | None = None) -> RunConfig:
    """Parse a config file; ``seed`` (a command-line override) replaces the root seed."""
    doc = read_config_doc(path) if path is not None else {}
    if seed is not None:
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        doc = {**doc, "seed": seed}
    try:
        return parse_config(doc)
    except ConfigError as exc:
        if path is None:
            raise
        raise ConfigError(f"{path}: {exc}") from exc
