import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given

from lrt.classify import classify_point, evaluate_accuracy, predict, train_classifier
from lrt.data import LabeledDataset, SyntheticSpec, generate_synthetic, split_dataset
from lrt.errors import DimensionError, ParameterError
from lrt.learn import LearnConfig, identity_transform, learn, learn_global


@pytest.fixture(scope="module")
def orthogonal_split():
    data, _ = generate_synthetic(SyntheticSpec(12, [2, 2, 2], 30, 0.02, orthogonal=True), seed=0)
    return split_dataset(data, 0.5, seed=0)


def test_nn_brute_force_oracle(orthogonal_split):
    train, test = orthogonal_split
    model = train_classifier(train, mode="nn")
    pred, dist = predict(model, test.Y)
    D = np.linalg.norm(test.Y[:, :, None] - train.Y[:, None, :], axis=0)
    nearest = np.argmin(D, axis=1)
    np.testing.assert_array_equal(pred, train.labels[nearest])
    np.testing.assert_allclose(dist, D.min(axis=1))


@pytest.mark.parametrize("mode, floor", [("nn", 0.85), ("omp", 0.99)])
def test_well_separated_classes_are_recognized(orthogonal_split, mode, floor):
    # nearest neighbour only sees 15 samples per plane, subspace reconstruction sees the span
    train, test = orthogonal_split
    model = train_classifier(train, mode=mode, sparsity=4)
    assert evaluate_accuracy(model, test) >= floor


def test_omp_residual_zero_for_training_span():
    B = np.eye(4)
    Y = np.hstack([B[:, :2] @ np.array([[1.0, 2.0, -1.0], [0.5, -1.0, 1.0]]),
                   B[:, 2:] @ np.array([[1.0, 2.0, -1.0], [0.5, -1.0, 1.0]])])
    model = train_classifier(LabeledDataset(Y, [0, 0, 0, 1, 1, 1]), mode="omp", sparsity=2, beta=10.0)
    c, residual = classify_point(model, np.array([3.0, -2.0, 0.0, 0.0]))
    assert c == 0
    assert residual == pytest.approx(0.0, abs=1e-6)


def test_ties_go_to_lowest_class():
    Y = np.array([[1.0, -1.0], [0.0, 0.0]])
    model = train_classifier(LabeledDataset(Y, [0, 1]), mode="nn")
    assert classify_point(model, [0.0, 1.0])[0] == 0


def test_empty_test_set_gives_nan(orthogonal_split):
    train, _ = orthogonal_split
    model = train_classifier(train, mode="nn")
    empty = train.subset(np.array([], dtype=int))
    assert np.isnan(evaluate_accuracy(model, empty))


def test_per_class_transforms_route_each_class(orthogonal_split):
    train, test = orthogonal_split
    tm = learn(train, LearnConfig(iterations=10), mode="per-class")
    model = train_classifier(train, tm, mode="nn")
    for c in range(3):
        np.testing.assert_allclose(model.galleries[c], tm.transforms[c] @ train.class_data(c))
    assert 0.0 <= evaluate_accuracy(model, test) <= 1.0


def test_learned_transform_does_not_hurt_separable_classes(orthogonal_split):
    train, test = orthogonal_split
    raw = evaluate_accuracy(train_classifier(train, mode="nn"), test)
    T = learn_global(train)
    assert evaluate_accuracy(train_classifier(train, T, mode="omp"), test) >= raw - 1e-12


def test_validation(orthogonal_split):
    train, _ = orthogonal_split
    with pytest.raises(ParameterError):
        train_classifier(train, mode="svm")
    with pytest.raises(ParameterError):
        train_classifier(train, sparsity=0)
    with pytest.raises(DimensionError):
        train_classifier(train, identity_transform(3))
    model = train_classifier(train, mode="nn")
    with pytest.raises(DimensionError):
        classify_point(model, np.zeros(5))
    with pytest.raises(DimensionError):
        predict(model, np.zeros((5, 2)))


@given(st.integers(0, 1000))
def test_predictions_are_valid_class_ids(seed):
    rng = np.random.default_rng(seed)
    data = LabeledDataset(rng.standard_normal((3, 12)), np.repeat([0, 1, 2], 4))
    for mode in ("nn", "omp"):
        model = train_classifier(data, mode=mode, sparsity=2)
        pred, score = predict(model, rng.standard_normal((3, 5)))
        assert set(pred) <= {0, 1, 2}
        assert np.all(score >= 0)
