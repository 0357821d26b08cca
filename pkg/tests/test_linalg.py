import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from hetlasso import linalg
from hetlasso.errors import DimensionMismatch, NoConvergence, NonFiniteValue, NonSymmetric, NotPositiveDefinite

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def naive_matmul(a, b):
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            s = 0.0
            for k in range(a.shape[1]):
                s += a[i, k] * b[k, j]
            out[i, j] = s
    return out


def random_spd(k, seed, shift=1.0):
    m = np.random.default_rng(seed).standard_normal((k, k))
    return m.T @ m + shift * np.eye(k)


# ------------------------------------------------------------- construction

def test_nonfinite_rejected():
    with pytest.raises(NonFiniteValue):
        linalg.as_matrix([[1.0, np.nan]])
    with pytest.raises(NonFiniteValue):
        linalg.as_vector([np.inf])


def test_shape_checks():
    with pytest.raises(DimensionMismatch):
        linalg.as_matrix([1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        linalg.as_vector([[1.0]])


# ------------------------------------------------------------------ matmul

def test_matmul_identity():
    a = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(linalg.matmul(np.eye(2), a), a)


def test_matmul_hand():
    np.testing.assert_array_equal(linalg.matmul([[1, 2], [3, 4]], [[0], [1]]), [[2], [4]])


def test_matmul_vs_triple_loop():
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal((7, 5)), rng.standard_normal((5, 3))
    assert np.max(np.abs(linalg.matmul(a, b) - naive_matmul(a, b))) <= 1e-12


def test_matmul_mismatch():
    with pytest.raises(DimensionMismatch):
        linalg.matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_matmul_deterministic():
    rng = np.random.default_rng(1)
    a, b = rng.standard_normal((30, 40)), rng.standard_normal((40, 20))
    assert np.array_equal(linalg.matmul(a, b), linalg.matmul(a, b))


# --------------------------------------------------------------- solve_spd

def test_solve_identity():
    b = np.array([[1.0, -2.0], [3.0, 0.5]])
    np.testing.assert_array_equal(linalg.solve_spd(np.eye(2), b), b)


def test_solve_diagonal():
    np.testing.assert_allclose(linalg.solve_spd(np.diag([2.0, 4.0]), [2.0, 8.0]), [1.0, 2.0], rtol=0, atol=1e-15)


def test_solve_random_spd_residual():
    a = random_spd(10, 2)
    b = np.random.default_rng(3).standard_normal(10)
    assert np.max(np.abs(a @ linalg.solve_spd(a, b) - b)) <= 1e-9


def test_solve_matrix_rhs():
    a = random_spd(6, 4)
    b = np.random.default_rng(5).standard_normal((6, 3))
    x = linalg.solve_spd(a, b)
    assert x.shape == (6, 3)
    assert np.max(np.abs(a @ x - b)) <= 1e-9 * np.max(np.abs(b))


def test_cholesky_factor():
    a = random_spd(8, 6)
    L = linalg.cholesky(a)
    assert np.allclose(np.triu(L, 1), 0)
    assert np.max(np.abs(L @ L.T - a)) <= 1e-12 * np.max(np.abs(a))


def test_not_positive_definite():
    with pytest.raises(NotPositiveDefinite):
        linalg.solve_spd([[1.0, 2.0], [2.0, 1.0]], [1.0, 1.0])
    # singular: pivot hits the 1e-12 relative tolerance
    with pytest.raises(NotPositiveDefinite):
        linalg.cholesky([[1.0, 1.0], [1.0, 1.0]])


def test_solve_rhs_mismatch():
    with pytest.raises(DimensionMismatch):
        linalg.solve_spd(np.eye(3), np.ones(2))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**31 - 1), st.floats(0, 6))
def test_solve_residual_property(k, seed, log_cond):
    # SPD with condition number up to 1e6
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((k, k)))
    ev = np.logspace(0, log_cond, k)
    a = (q * ev) @ q.T
    a = (a + a.T) / 2
    b = np.random.default_rng(seed + 1).standard_normal(k)
    x = linalg.solve_spd(a, b)
    assert np.max(np.abs(a @ x - b)) <= 1e-8 * max(np.max(np.abs(b)), 1e-300) * max(1.0, np.max(np.abs(a)))


# ------------------------------------------------------------------ Jacobi

def test_eigen_diagonal():
    np.testing.assert_array_equal(linalg.symmetric_eigenvalues(np.diag([2.0, 0.0, 3.0])), [0.0, 2.0, 3.0])


def test_eigen_two_by_two():
    np.testing.assert_allclose(linalg.symmetric_eigenvalues([[2.0, 1.0], [1.0, 2.0]]), [1.0, 3.0], rtol=0, atol=1e-14)


def test_eigen_trace_det_6x6():
    m = np.random.default_rng(7).standard_normal((6, 6))
    a = (m + m.T) / 2
    ev = linalg.symmetric_eigenvalues(a)
    assert abs(np.sum(ev) - np.trace(a)) <= 1e-9 * max(1, abs(np.trace(a)))
    det = np.linalg.det(a)
    assert abs(np.prod(ev) - det) <= 1e-9 * max(1, abs(det))


def test_eigen_nonsymmetric():
    with pytest.raises(NonSymmetric):
        linalg.symmetric_eigenvalues([[1.0, 2.0], [0.0, 1.0]])


def test_eigen_tiny_asymmetry_symmetrized():
    a = np.array([[2.0, 1.0], [1.0 + 1e-13, 2.0]])
    np.testing.assert_allclose(linalg.symmetric_eigenvalues(a), [1.0, 3.0], atol=1e-12)


def test_eigen_no_convergence():
    m = np.random.default_rng(8).standard_normal((8, 8))
    with pytest.raises(NoConvergence):
        linalg.symmetric_eigenvalues(m + m.T, max_sweeps=1)


def test_eigen_pure():
    m = np.random.default_rng(9).standard_normal((9, 9))
    a = m + m.T
    assert np.array_equal(linalg.symmetric_eigenvalues(a), linalg.symmetric_eigenvalues(a))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10).flatmap(lambda k: arrays(np.float64, (k, k), elements=finite)))
def test_eigen_trace_property(m):
    a = (m + m.T) / 2
    ev = linalg.symmetric_eigenvalues(a)
    assert np.all(np.diff(ev) >= 0)
    scale = max(1.0, np.sqrt(np.sum(a * a)))
    assert abs(np.sum(ev) - np.trace(a)) <= 1e-9 * scale
    # Frobenius norm is preserved by orthogonal similarity
    assert abs(np.sum(ev**2) - np.sum(a * a)) <= 1e-9 * scale**2
    np.testing.assert_allclose(ev, np.linalg.eigvalsh(a), rtol=0, atol=1e-9 * scale)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**31 - 1))
def test_eigen_spd_positive(k, seed):
    assert np.all(linalg.symmetric_eigenvalues(random_spd(k, seed, shift=0.1)) > 0)


# ----------------------------------------------------------- power method

def test_power_diagonal():
    assert linalg.power_lambda_max(np.diag([1.0, 5.0, 2.0])) == pytest.approx(5.0, rel=1e-8)


def test_power_identity():
    assert linalg.power_lambda_max(np.eye(6)) == pytest.approx(1.0, rel=1e-12)


def test_power_vs_jacobi():
    a = random_spd(20, 10)
    top = linalg.symmetric_eigenvalues(a)[-1]
    assert abs(linalg.power_lambda_max(a) - top) <= 1e-6 * top


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 50), st.integers(0, 2**31 - 1))
def test_power_vs_jacobi_property(k, seed):
    m = np.random.default_rng(seed).standard_normal((k + 3, k))
    a = m.T @ m
    top = linalg.symmetric_eigenvalues(a)[-1]
    assert abs(linalg.power_lambda_max(a) - top) <= 1e-6 * top


def test_power_no_convergence():
    # two top eigenvalues of equal size and opposite sign never separate
    with pytest.raises(NoConvergence):
        linalg.power_lambda_max(np.diag([1.0, -1.0]), max_iter=50)


def test_power_zero_matrix():
    assert linalg.power_lambda_max(np.zeros((3, 3))) == 0.0


# ------------------------------------------------------------------ norms

def test_norms():
    assert linalg.inf_norm([1, -3, 2]) == 3
    assert linalg.l2_norm([1, -3, 2]) == pytest.approx(math.sqrt(14), rel=1e-15)
    assert linalg.inf_norm(np.zeros(4)) == 0
    assert linalg.l2_norm(np.zeros(4)) == 0


def test_l2_table_beta():
    beta = np.r_[np.full(10, 40.0), np.full(10, 5.0), np.zeros(980)]
    v = linalg.l2_norm(beta)
    assert v == pytest.approx(math.sqrt(16250), rel=1e-14)
    assert round(v) == 127


# ----------------------------------------------------------- column_slice

def test_column_slice_identity_and_empty():
    x = np.arange(12.0).reshape(3, 4)
    np.testing.assert_array_equal(linalg.column_slice(x, [0, 1, 2, 3]), x)
    assert linalg.column_slice(x, []).shape == (3, 0)


def test_column_slice_partition_is_permutation():
    x = np.random.default_rng(11).standard_normal((5, 7))
    s = [4, 1, 6]
    c = [j for j in range(7) if j not in s]
    joined = np.hstack([linalg.column_slice(x, s), linalg.column_slice(x, c)])
    order = s + c
    np.testing.assert_array_equal(joined, x[:, order])
    assert sorted(order) == list(range(7))


def test_column_slice_errors():
    x = np.ones((2, 3))
    with pytest.raises(IndexError):
        linalg.column_slice(x, [3])
    with pytest.raises(ValueError):
        linalg.column_slice(x, [1, 1])
