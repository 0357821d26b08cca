import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hetlasso import solver


def instance(n, p, seed, k=3):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    beta = np.zeros(p)
    beta[:k] = rng.choice([-1, 1], k) * rng.uniform(1, 3, k)
    y = x @ beta + 0.5 * rng.standard_normal(n)
    return x, y, beta


def ista(x, y, lam, iters=200_000, tol=1e-14):
    """Proximal-gradient reference solver, independent of the coordinate kernels."""
    n = x.shape[0]
    step = n / np.linalg.eigvalsh(x.T @ x)[-1]
    b = np.zeros(x.shape[1])
    for _ in range(iters):
        g = x.T @ (x @ b - y) / n
        z = b - step * g
        new = np.sign(z) * np.maximum(np.abs(z) - step * lam, 0.0)
        if np.max(np.abs(new - b)) < tol:
            return new
        b = new
    return b


# ----------------------------------------------------------- small pieces

def test_objective_zero_beta():
    x, y, _ = instance(10, 4, 0)
    assert solver.objective(x, y, np.zeros(4), 0.7) == pytest.approx(y @ y / 20, rel=1e-15)


def test_objective_least_squares():
    x, y, _ = instance(30, 4, 1)
    ls = np.linalg.lstsq(x, y, rcond=None)[0]
    r = y - x @ ls
    assert solver.objective(x, y, ls, 0.0) == pytest.approx(r @ r / 60, rel=1e-14)


def test_objective_direct():
    x, y, b = instance(12, 5, 2)
    direct = sum((y[i] - sum(x[i, j] * b[j] for j in range(5))) ** 2 for i in range(12)) / 24 + 0.3 * sum(abs(b))
    assert solver.objective(x, y, b, 0.3) == pytest.approx(direct, rel=1e-12)


@pytest.mark.parametrize("z,t,out", [(3, 1, 2), (-3, 1, -2), (0.5, 1, 0), (1, 1, 0), (-1, 1, 0)])
def test_soft_threshold(z, t, out):
    assert solver.soft_threshold(z, t) == out


def test_soft_threshold_negative():
    with pytest.raises(ValueError):
        solver.soft_threshold(1.0, -0.1)


# ------------------------------------------------------ coordinate descent

def test_full_shrinkage():
    x, y, _ = instance(20, 6, 3)
    lmax = solver.lambda_max(x, y)
    for lam in (lmax, 2 * lmax):
        sol = solver.coordinate_descent(x, y, lam)
        assert np.count_nonzero(sol.beta_hat) == 0
    assert np.count_nonzero(solver.coordinate_descent(x, y, 0.99 * lmax).beta_hat) > 0


def test_orthonormal_closed_form():
    rng = np.random.default_rng(4)
    n, p = 40, 6
    q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    x = np.sqrt(n) * q
    y = x @ np.array([2.0, -1.0, 0.3, 0, 0, 0]) + rng.standard_normal(n)
    for lam in (0.05, 0.4, 1.5):
        sol = solver.coordinate_descent(x, y, lam, tol=1e-12)
        np.testing.assert_allclose(sol.beta_hat, solver.orthonormal_closed_form(x, y, lam), rtol=0, atol=1e-10)


def test_matches_reference_and_local_optimality():
    x, y, _ = instance(20, 8, 5)
    lam = 0.2
    sol = solver.coordinate_descent(x, y, lam, tol=1e-12)
    ref = ista(x, y, lam)
    np.testing.assert_allclose(sol.beta_hat, ref, rtol=0, atol=1e-7)
    f0 = solver.objective(x, y, sol.beta_hat, lam)
    assert abs(f0 - sol.objective) <= 1e-10 * f0
    best = f0
    for j in range(8):
        for d in np.linspace(-1e-3, 1e-3, 21):
            b = sol.beta_hat.copy()
            b[j] += d
            best = min(best, solver.objective(x, y, b, lam))
    assert best >= f0 - 1e-8


def test_least_squares_at_zero_lambda():
    x, y, _ = instance(50, 5, 6)
    sol = solver.coordinate_descent(x, y, 0.0, tol=1e-12)
    np.testing.assert_allclose(sol.beta_hat, np.linalg.lstsq(x, y, rcond=None)[0], rtol=0, atol=1e-6)


def test_descent_property():
    x, y, _ = instance(25, 10, 7, k=5)
    lam = 0.05
    values = [solver.coordinate_descent(x, y, lam, max_iter=k).objective for k in range(1, 30)]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


def test_non_convergence_flag(caplog):
    x, y, _ = instance(25, 10, 8, k=5)
    with caplog.at_level(logging.WARNING, logger="hetlasso.solver"):
        sol = solver.coordinate_descent(x, y, 1e-4, max_iter=1)
    assert not sol.converged
    assert sol.iterations == 1
    assert "stopped" in caplog.text


def test_invalid_inputs():
    x, y, _ = instance(10, 3, 9)
    with pytest.raises(ValueError):
        solver.coordinate_descent(x, y, -1.0)
    x[:, 1] = 0
    with pytest.raises(ValueError):
        solver.coordinate_descent(x, y, 0.1)
    with pytest.raises(ValueError):
        solver.coordinate_descent(np.ones((3, 2)), np.ones(4), 0.1)


def test_kkt_violation_function():
    x, y, _ = instance(15, 5, 10)
    sol = solver.coordinate_descent(x, y, 0.3)
    assert solver.kkt_violation(x, y, sol.beta_hat, 0.3) == pytest.approx(sol.kkt_violation, abs=1e-12)
    assert solver.kkt_violation(x, y, np.zeros(5), 0.0) > 0


@settings(max_examples=60, deadline=None)
@given(st.integers(5, 30), st.integers(1, 12), st.integers(0, 2**31 - 1), st.floats(0.01, 0.9))
def test_kkt_certificate_property(n, p, seed, frac):
    x, y, _ = instance(n, p, seed, k=min(3, p))
    lam = frac * solver.lambda_max(x, y)
    sol = solver.coordinate_descent(x, y, lam)
    tol = solver.default_tol(y)
    assert sol.converged
    grad = x.T @ (y - x @ sol.beta_hat) / n
    act = sol.beta_hat != 0
    assert np.all(np.abs(grad[act] - lam * np.sign(sol.beta_hat[act])) <= tol)
    assert np.all(np.abs(grad[~act]) <= lam + tol)
    assert sol.kkt_violation <= tol
    assert abs(sol.objective - solver.objective(x, y, sol.beta_hat, lam)) <= 1e-10 * sol.objective


# ------------------------------------------------------------------ paths

def test_default_grid():
    x, y, _ = instance(20, 6, 11)
    g = solver.default_grid(x, y)
    assert g.size == 100
    assert g[0] == pytest.approx(solver.lambda_max(x, y))
    assert g[-1] == pytest.approx(1e-4 * g[0])
    path = solver.lambda_grid_path(x, y)
    assert np.count_nonzero(path[0].beta_hat) == 0


def test_path_l1_monotone_and_cold_start():
    x, y, _ = instance(30, 12, 12, k=4)
    grid = solver.default_grid(x, y, num=60)
    path = solver.lambda_grid_path(x, y, grid, tol=1e-11)
    l1 = [np.sum(np.abs(s.beta_hat)) for s in path]
    assert all(b >= a - 1e-9 for a, b in zip(l1, l1[1:]))
    for k in np.random.default_rng(0).choice(60, 10, replace=False):
        cold = solver.coordinate_descent(x, y, grid[k], tol=1e-11)
        np.testing.assert_allclose(path[k].beta_hat, cold.beta_hat, rtol=0, atol=1e-6)


@pytest.mark.parametrize("grid", [[], [1.0, 2.0], [1.0, 1.0], [1.0, -1.0]])
def test_bad_grid(grid):
    x, y, _ = instance(10, 3, 13)
    with pytest.raises(ValueError):
        solver.lambda_grid_path(x, y, grid)


def test_recovery_grid_and_sign_search():
    x, y, beta = instance(60, 8, 14)
    g = solver.recovery_grid(x, y, num=500)
    lmax = solver.lambda_max(x, y)
    assert g[0] == pytest.approx(1e3 * lmax) and g[-1] == pytest.approx(1e-6 * lmax)
    res = solver.grid_sign_recovery(x, y, beta, grid=g)
    assert res.success
    sol = solver.coordinate_descent(x, y, res.lam)
    assert np.array_equal(np.sign(sol.beta_hat), np.sign(beta))


def test_sign_search_failure():
    x, y, beta = instance(20, 8, 15)
    wrong = -beta
    res = solver.grid_sign_recovery(x, y, wrong, grid=solver.recovery_grid(x, y, num=200))
    assert not res.success and res.lam is None
