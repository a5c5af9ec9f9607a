import json

import numpy as np
import pytest

from lrt.classify import predict, train_classifier
from lrt.config import SEED_OFFSETS, ConfigError, load_config, parse_config
from lrt.data import SyntheticSpec, generate_synthetic, two_lines
from lrt.learn import LearnConfig, learn
from lrt.persist import (
    ManifestError,
    load_classifier,
    load_transform,
    save_classifier,
    save_transform,
)

# ------------------------------------------------------------ persistence

@pytest.mark.parametrize("mode", ["global", "per-class"])
def test_transform_round_trip(tmp_path, mode):
    data, _ = two_lines(np.pi / 4, 30, 0.01, seed=0)
    model = learn(data, LearnConfig(iterations=5, gamma=1.5), mode=mode)
    save_transform(tmp_path / "m", model)
    back = load_transform(tmp_path / "m")
    assert back.kind == model.kind
    for a, b in zip(model.transforms, back.transforms, strict=False):
        np.testing.assert_array_equal(a, b)
    assert back.config == model.config
    assert back.objective_trace == model.objective_trace


@pytest.mark.parametrize("mode", ["nn", "omp"])
def test_classifier_round_trip_predicts_identically(tmp_path, mode):
    data, _ = generate_synthetic(SyntheticSpec(6, [2, 2], 20, 0.05), seed=1)
    model = train_classifier(data, learn(data, LearnConfig(iterations=3)), mode=mode, sparsity=3)
    save_classifier(tmp_path / "c", model)
    back = load_classifier(tmp_path / "c")
    np.testing.assert_array_equal(predict(model, data.Y)[0], predict(back, data.Y)[0])
    np.testing.assert_array_equal(predict(model, data.Y)[1], predict(back, data.Y)[1])


def test_manifest_errors_name_the_file(tmp_path):
    with pytest.raises(ManifestError, match="manifest.json"):
        load_transform(tmp_path)
    (tmp_path / "manifest.json").write_text("{")
    with pytest.raises(ManifestError, match="invalid JSON"):
        load_transform(tmp_path)
    (tmp_path / "manifest.json").write_text(json.dumps({"type": "classifier"}))
    with pytest.raises(ManifestError, match="not a transform"):
        load_transform(tmp_path)
    (tmp_path / "manifest.json").write_text(json.dumps({"type": "transform", "kind": "global",
                                                        "transforms": ["missing.lrtm"]}))
    with pytest.raises(ManifestError, match="cannot load"):
        load_transform(tmp_path)


def test_classifier_manifest_class_count_checked(tmp_path):
    data, _ = two_lines(np.pi / 4, 10, 0.01, seed=0)
    save_classifier(tmp_path, train_classifier(data, mode="nn"))
    doc = json.loads((tmp_path / "manifest.json").read_text())
    doc["class_ids"] = [0, 1, 2]
    (tmp_path / "manifest.json").write_text(json.dumps(doc))
    with pytest.raises(ManifestError, match="3 classes"):
        load_classifier(tmp_path)


# ------------------------------------------------------------ config

def test_defaults_and_seed_derivation():
    cfg = parse_config({})
    assert cfg.seed == 42
    assert cfg.learn.seed == 42 + SEED_OFFSETS["learn"]
    cfg = parse_config({"seed": 7})
    assert cfg.learn.seed == 8
    assert cfg.derived_seed("split") == 10
    assert parse_config({"seed": 7, "learn": {"seed": 100}}).learn.seed == 100


def test_sections_parsed():
    cfg = parse_config({"learn": {"iterations": 5, "gamma": 2.0}, "cluster": {"K": 8, "beta": 0.5},
                        "classify": {"mode": "nn"}, "synth": {"ambient_dim": 3, "subspace_dims": [1, 1]}})
    assert (cfg.learn.iterations, cfg.learn.gamma, cfg.cluster.K, cfg.classify.mode) == (5, 2.0, 8, "nn")
    assert cfg.synthetic_spec().ambient_dim == 3


@pytest.mark.parametrize("doc, match", [
    ({"bogus": 1}, "unknown top-level"),
    ({"learn": {"iters": 3}}, "unknown key"),
    ({"seed": -1}, "seed"),
    ({"seed": True}, "seed"),
    ({"learn": {"gamma": 0}}, "gamma"),
    ({"cluster": {"K": 0}}, "K"),
    ({"classify": {"mode": "svm"}}, "mode"),
    ({"classify": {"transform": "both"}}, "transform"),
    ({"learn": []}, "JSON object"),
    ({"synth": {"dims": 3}}, "unknown key"),
])
def test_invalid_configs(doc, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(doc)


def test_missing_synth_section():
    with pytest.raises(ConfigError, match="synth"):
        parse_config({}).synthetic_spec()


def test_load_config_file_and_override(tmp_path):
    p = tmp_path / "run.json"
    p.write_text(json.dumps({"seed": 3, "learn": {"iterations": 9}}))
    assert load_config(p).seed == 3
    cfg = load_config(p, seed=11)
    assert (cfg.seed, cfg.learn.seed, cfg.learn.iterations) == (11, 12, 9)
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="run.json"):
        load_config(p)
    with pytest.raises(ConfigError, match="missing.json"):
        load_config(tmp_path / "missing.json")
