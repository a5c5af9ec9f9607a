import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given

from lrt.decomp import default_beta, omp, rpca
from lrt.errors import DimensionError, ParameterError


def low_rank(rng, m, n, r):
    return rng.standard_normal((m, r)) @ rng.standard_normal((r, n))


def test_rpca_clean_low_rank(rng):
    M = low_rank(rng, 50, 50, 2)
    res = rpca(M)
    assert res.converged
    assert np.linalg.norm(res.S) / np.linalg.norm(M) <= 1e-5
    assert np.linalg.norm(res.L - M) / np.linalg.norm(M) <= 1e-5


def test_rpca_recovers_spiky_corruption():
    rng = np.random.default_rng(7)
    L0 = low_rank(rng, 100, 100, 2)
    M = L0.copy()
    mask = rng.random(M.shape) < 0.05
    M[mask] = rng.choice([-5.0, 5.0], size=mask.sum())
    res = rpca(M, beta=1 / np.sqrt(100))
    assert np.linalg.norm(res.L - L0) / np.linalg.norm(L0) <= 1e-3


def test_rpca_zero_matrix():
    res = rpca(np.zeros((4, 5)))
    assert not res.L.any() and not res.S.any()
    assert res.converged


def test_rpca_invalid_beta():
    with pytest.raises(ParameterError):
        rpca(np.eye(3), beta=0.0)
    with pytest.raises(ParameterError):
        rpca(np.eye(3), beta=-2.0)


def test_rpca_iteration_cap_is_flagged(rng):
    res = rpca(low_rank(rng, 30, 30, 3) + rng.standard_normal((30, 30)), max_iter=2)
    assert not res.converged
    assert res.iterations_used == 2
    assert np.isfinite(res.primal_residual)


def test_rpca_large_beta_keeps_everything_low_rank(rng):
    M = rng.standard_normal((6, 10))
    res = rpca(M, beta=1e6)
    assert np.abs(res.S).max() == 0.0
    np.testing.assert_allclose(res.L, M, atol=1e-6 * np.abs(M).max())


def test_default_beta():
    assert default_beta((100, 400)) == pytest.approx(1 / 20)


@given(st.integers(3, 12), st.integers(3, 12), st.integers(0, 2 ** 31 - 1))
def test_rpca_reconstruction_invariant(m, n, seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((m, n))
    res = rpca(M)
    if res.converged:
        assert np.linalg.norm(M - res.L - res.S) <= 1e-7 * np.linalg.norm(M) * (1 + 1e-9)


# ---------------------------------------------------------------- omp

def test_omp_single_atom(rng):
    D, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    x = omp(2 * D[:, 3], D, 1)
    assert np.flatnonzero(x).tolist() == [3]
    assert x[3] == pytest.approx(2.0)


def test_omp_two_atom_exact_recovery(rng):
    D, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    y = 3 * D[:, 1] + D[:, 4]
    x = omp(y, D, 2)
    assert sorted(np.flatnonzero(x).tolist()) == [1, 4]
    assert np.linalg.norm(y - D @ x) <= 1e-10
    assert x[1] == pytest.approx(3.0) and x[4] == pytest.approx(1.0)


def test_omp_restores_atom_scale():
    D = np.diag([2.0, 5.0, 1.0])
    x = omp(np.array([0.0, 10.0, 0.0]), D, 1)
    np.testing.assert_allclose(x, [0.0, 2.0, 0.0])


def test_omp_tie_breaks_to_lowest_index():
    D = np.array([[1.0, 0.0], [0.0, 1.0]])
    x = omp(np.array([1.0, 1.0]), D, 1)
    assert np.flatnonzero(x).tolist() == [0]


def test_omp_errors():
    D = np.eye(3)
    with pytest.raises(ParameterError):
        omp(np.ones(3), D, 0)
    with pytest.raises(ParameterError):
        omp(np.ones(3), D, 4)
    with pytest.raises(ParameterError):
        omp(np.ones(3), np.zeros((3, 2)), 1)
    with pytest.raises(DimensionError):
        omp(np.ones(2), D, 1)


@given(st.integers(0, 2 ** 31 - 1))
def test_omp_residual_nonincreasing_in_sparsity(seed):
    rng = np.random.default_rng(seed)
    D = rng.standard_normal((8, 12))
    y = rng.standard_normal(8)
    prev = np.inf
    for s in range(1, 9):
        x = omp(y, D, s)
        assert np.count_nonzero(x) <= s
        r = np.linalg.norm(y - D @ x)
        assert r <= prev + 1e-10
        prev = r


@given(st.integers(0, 2 ** 31 - 1))
def test_omp_deterministic(seed):
    rng = np.random.default_rng(seed)
    D = rng.standard_normal((5, 9))
    y = rng.standard_normal(5)
    np.testing.assert_array_equal(omp(y, D, 3), omp(y, D, 3))
