import struct
import warnings

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given
from hypothesis.extra.numpy import arrays

from lrt.data import (
    LabeledDataset,
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    load_labels,
    load_matrix,
    remap_labels,
    rms_deviation,
    save_labels,
    save_matrix,
    split_dataset,
    stack_datasets,
    three_lines,
    two_lines,
)
from lrt.errors import DimensionError, MatrixFormatError, ParameterError
from lrt.linalg import principal_angles, smallest_principal_angle

finite = st.floats(-1e6, 1e6, allow_nan=False)


# ------------------------------------------------------------ dataset

def test_remap_labels_warns_and_maps():
    with pytest.warns(UserWarning, match="remapped"):
        out = remap_labels([5, 2, 5, 9])
    np.testing.assert_array_equal(out, [1, 0, 1, 2])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        np.testing.assert_array_equal(remap_labels([1, 0, 1]), [1, 0, 1])


def test_dataset_validation():
    with pytest.raises(DimensionError):
        LabeledDataset(np.ones((2, 3)), [0, 1])
    with pytest.raises(ParameterError):
        LabeledDataset(np.array([[np.nan, 1.0]]), [0, 1])
    with pytest.raises(ParameterError):
        LabeledDataset(np.ones((1, 2)), [0.5, 1.0])
    data = LabeledDataset(np.arange(6.0).reshape(2, 3), [0, 1, 0])
    assert (data.dim, data.num_points, data.num_classes) == (2, 3, 2)
    np.testing.assert_array_equal(data.class_data(0), [[0, 2], [3, 5]])


# ------------------------------------------------------------ file io

@pytest.mark.parametrize("suffix", [".csv", ".lrtm"])
def test_matrix_round_trip_examples(tmp_path, suffix):
    M = np.array([[1.0, -2.5e-300, 3.0], [np.pi, 0.0, -1e300]])
    path = tmp_path / f"m{suffix}"
    save_matrix(path, M)
    np.testing.assert_array_equal(load_matrix(path), M)


@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)), elements=finite))
def test_matrix_round_trip_property(tmp_path_factory, M):
    root = tmp_path_factory.mktemp("rt")
    for name in ("a.csv", "a.bin"):
        save_matrix(root / name, M)
        np.testing.assert_array_equal(load_matrix(root / name), M)


def test_csv_one_point_per_row(tmp_path):
    save_matrix(tmp_path / "m.csv", np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]))
    assert (tmp_path / "m.csv").read_text().splitlines() == ["1,4", "2,5", "3,6"]


def test_csv_errors_carry_location(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1,2\n3\n")
    with pytest.raises(MatrixFormatError, match=r"bad.csv:2"):
        load_matrix(p)
    p.write_text("1,x\n")
    with pytest.raises(MatrixFormatError, match=r":1:"):
        load_matrix(p)
    p.write_text("1,nan\n")
    with pytest.raises(MatrixFormatError, match="non-finite"):
        load_matrix(p)
    p.write_text("\n\n")
    with pytest.raises(MatrixFormatError, match="empty"):
        load_matrix(p)


def test_binary_errors_carry_offsets(tmp_path):
    p = tmp_path / "bad.lrtm"
    p.write_bytes(b"LRT")
    with pytest.raises(MatrixFormatError, match="header"):
        load_matrix(p)
    p.write_bytes(struct.pack("<4sII", b"XXXX", 1, 1) + b"\0" * 8)
    with pytest.raises(MatrixFormatError, match="offset 0"):
        load_matrix(p)
    p.write_bytes(struct.pack("<4sII", b"LRTM", 2, 2) + b"\0" * 8)
    with pytest.raises(MatrixFormatError, match="needs 32 bytes"):
        load_matrix(p)
    p.write_bytes(struct.pack("<4sII", b"LRTM", 1, 2) + struct.pack("<2d", 1.0, np.inf))
    with pytest.raises(MatrixFormatError, match="offset 20"):
        load_matrix(p)


def test_save_refuses_non_finite(tmp_path):
    with pytest.raises(ParameterError):
        save_matrix(tmp_path / "x.csv", np.array([[np.nan]]))
    assert not (tmp_path / "x.csv").exists()


def test_labels_io(tmp_path):
    save_labels(tmp_path / "l.txt", [0, 1, 1])
    np.testing.assert_array_equal(load_labels(tmp_path / "l.txt"), [0, 1, 1])
    (tmp_path / "bad.txt").write_text("0\n1.5\n")
    with pytest.raises(MatrixFormatError, match=":2:"):
        load_labels(tmp_path / "bad.txt")


def test_load_dataset_count_mismatch(tmp_path):
    save_matrix(tmp_path / "y.csv", np.ones((2, 3)))
    save_labels(tmp_path / "l.txt", [0, 1])
    with pytest.raises(DimensionError):
        load_dataset(tmp_path / "y.csv", tmp_path / "l.txt")
    save_labels(tmp_path / "l.txt", [0, 1, 0])
    assert load_dataset(tmp_path / "y.csv", tmp_path / "l.txt").num_points == 3


# ------------------------------------------------------------ synthetic

def test_synthetic_noiseless_points_lie_in_their_subspaces():
    data, bases = generate_synthetic(SyntheticSpec(8, [2, 3], 50), seed=1)
    for c, B in enumerate(bases):
        assert rms_deviation(data.class_data(c), B) < 1e-12
    assert data.num_points == 100


def test_synthetic_seeded_and_deterministic():
    spec = SyntheticSpec(5, [1, 2], 10, 0.1)
    a, _ = generate_synthetic(spec, seed=3)
    b, _ = generate_synthetic(spec, seed=3)
    c, _ = generate_synthetic(spec, seed=4)
    np.testing.assert_array_equal(a.Y, b.Y)
    assert not np.array_equal(a.Y, c.Y)


@given(st.floats(0.05, np.pi / 2), st.integers(0, 10_000))
def test_two_subspace_angle_is_exact(angle, seed):
    _, bases = generate_synthetic(SyntheticSpec(6, [2, 2], 5, angle=angle), seed)
    assert smallest_principal_angle(bases[0], bases[1]) == pytest.approx(angle, abs=1e-9)


@given(st.integers(2, 6), st.floats(0.1, np.pi / 2), st.integers(0, 10_000))
def test_max_pairwise_angle_bounds_all_pairs(C, theta, seed):
    spec = SyntheticSpec(10, [2] * C, 5, max_pairwise_angle=theta)
    _, bases = generate_synthetic(spec, seed)
    for i in range(C):
        for j in range(i + 1, C):
            assert smallest_principal_angle(bases[i], bases[j]) <= theta + 1e-9


def test_orthogonal_fixture():
    _, bases = generate_synthetic(SyntheticSpec(9, [3, 3, 3], 5, orthogonal=True), seed=2)
    for i in range(3):
        for j in range(i + 1, 3):
            np.testing.assert_allclose(principal_angles(bases[i], bases[j]), np.pi / 2, atol=1e-9)
    with pytest.raises(ParameterError):
        SyntheticSpec(5, [3, 3], orthogonal=True).validate()


def test_outliers_replace_requested_fraction():
    spec = SyntheticSpec(4, [1, 1], 50, outlier_fraction=0.1)
    data, bases = generate_synthetic(spec, seed=0)
    off = [np.linalg.norm(data.Y[:, i] - bases[data.labels[i]].basis @ (bases[data.labels[i]].basis.T
                                                                          @ data.Y[:, i])) > 1e-9
           for i in range(data.num_points)]
    assert sum(off) == 10


@pytest.mark.parametrize("bad", [
    dict(ambient_dim=0, subspace_dims=[1]),
    dict(ambient_dim=3, subspace_dims=[]),
    dict(ambient_dim=3, subspace_dims=[4]),
    dict(ambient_dim=3, subspace_dims=[1], noise_sigma=-1),
    dict(ambient_dim=3, subspace_dims=[1], outlier_fraction=1.0),
    dict(ambient_dim=3, subspace_dims=[1, 1, 1], angle=0.3),
    dict(ambient_dim=3, subspace_dims=[2, 2], angle=0.3),
    dict(ambient_dim=3, subspace_dims=[1, 1], angle=2.0),
    dict(ambient_dim=2, subspace_dims=[1, 1, 1], max_pairwise_angle=0.3),
    dict(ambient_dim=3, subspace_dims=[1], coefficient_range=(1, 1)),
    dict(ambient_dim=3, subspace_dims=[1, 1], points_per_subspace=[3]),
])
def test_synthetic_spec_rejects(bad):
    with pytest.raises(ParameterError):
        SyntheticSpec(**bad).validate()


def test_line_fixtures_geometry():
    _, bases = two_lines(np.pi / 4, 30, 0.0, seed=0)
    assert smallest_principal_angle(bases[0], bases[1]) == pytest.approx(np.pi / 4)
    _, bases = three_lines(30, 0.0, seed=0)
    angles = sorted(smallest_principal_angle(bases[i], bases[j]) for i, j in [(0, 1), (0, 2), (1, 2)])
    np.testing.assert_allclose(angles, [np.pi / 4, np.pi / 4, np.pi / 3])


def test_rms_deviation_example():
    Y = np.array([[1.0, 2.0], [3.0, -4.0]])
    assert rms_deviation(Y, np.array([[1.0], [0.0]])) == pytest.approx(np.sqrt(12.5))


# ------------------------------------------------------------ splits

@given(st.floats(0.0, 1.0), st.integers(0, 1000))
def test_split_is_stratified_partition(frac, seed):
    data, _ = generate_synthetic(SyntheticSpec(3, [1, 1, 1], [7, 10, 4]), seed=0)
    train, test = split_dataset(data, frac, seed)
    assert train.num_points + test.num_points == data.num_points
    for c, n in enumerate([7, 10, 4]):
        assert np.sum(train.labels == c) == int(round(frac * n))
    joined = np.sort(np.hstack([train.Y, test.Y]), axis=1)
    np.testing.assert_array_equal(joined, np.sort(data.Y, axis=1))


def test_split_keeps_class_ids_and_rejects_tiny_classes():
    data = LabeledDataset(np.arange(5.0)[None, :], [0, 0, 1, 1, 2])
    with pytest.raises(ParameterError):
        split_dataset(data, 0.5)
    _train, test = split_dataset(data, 1.0)
    assert test.num_points == 0
    with pytest.raises(ParameterError):
        split_dataset(data, 1.5)


def test_stack_datasets():
    a = LabeledDataset(np.ones((2, 2)), [0, 1])
    b = LabeledDataset(np.zeros((2, 1)), [0])
    out = stack_datasets([a, b])
    assert out.num_points == 3
    np.testing.assert_array_equal(out.labels, [0, 1, 0])
