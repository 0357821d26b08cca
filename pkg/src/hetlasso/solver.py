"""Numerical Lasso: cyclic coordinate descent and warm-started lambda paths.

Objective: (1/2n) ||Y - X beta||_2^2 + lambda ||beta||_1.

This solver is deliberately independent of the closed-form KKT machinery in
``sign_oracle``; the two are checked against each other.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

log = logging.getLogger(__name__)

DEFAULT_MAX_SWEEPS = 100_000


@dataclass(frozen=True)
class LassoSolution:
    beta_hat: np.ndarray
    lam: float
    iterations: int
    objective: float
    kkt_violation: float
    converged: bool = True


def objective(x, y, beta, lam: float) -> float:
    x = np.asarray(x, dtype=np.float64)
    r = np.asarray(y, dtype=np.float64) - x @ np.asarray(beta, dtype=np.float64)
    return float(r @ r) / (2 * x.shape[0]) + lam * float(np.sum(np.abs(beta)))


def soft_threshold(z, t):
    if np.any(np.asarray(t) < 0):
        raise ValueError("threshold must be non-negative")
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def lambda_max(x, y) -> float:
    """Smallest lambda at which the Lasso solution is identically zero."""
    x = np.asarray(x, dtype=np.float64)
    return float(np.max(np.abs(x.T @ np.asarray(y, dtype=np.float64)))) / x.shape[0]


def kkt_violation(x, y, beta, lam: float) -> float:
    """Largest violation of the Lasso subgradient conditions.

    Active coordinates need X_j^T r / n = lam sign(beta_j); inactive ones need
    |X_j^T r / n| <= lam.
    """
    x = np.asarray(x, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    grad = x.T @ (np.asarray(y, dtype=np.float64) - x @ beta) / x.shape[0]
    active = beta != 0
    viol = np.where(active, np.abs(grad - lam * np.sign(beta)), np.maximum(np.abs(grad) - lam, 0.0))
    return float(np.max(viol)) if viol.size else 0.0


@numba.njit(cache=True)
def _sweep(xf, resid, beta, col_sq, lam, n, only_active):
    max_delta = 0.0
    for j in range(xf.shape[1]):
        bj = beta[j]
        if col_sq[j] == 0.0 or (only_active and bj == 0.0):
            continue
        col = xf[:, j]
        dot = 0.0
        for i in range(n):
            dot += col[i] * resid[i]
        cj = col_sq[j] / n
        z = dot / n + cj * bj
        if z > lam:
            new = (z - lam) / cj
        elif z < -lam:
            new = (z + lam) / cj
        else:
            new = 0.0
        delta = new - bj
        if delta != 0.0:
            for i in range(n):
                resid[i] -= delta * col[i]
            beta[j] = new
            if abs(delta) > max_delta:
                max_delta = abs(delta)
    return max_delta


@numba.njit(cache=True)
def _cd_kernel(xf, y, beta, col_sq, lam, tol, max_sweeps):
    """Active-set cyclic coordinate descent. Returns (sweeps, converged)."""
    n = xf.shape[0]
    resid = y - xf @ beta
    sweeps = 0
    while sweeps < max_sweeps:
        delta = _sweep(xf, resid, beta, col_sq, lam, n, False)
        sweeps += 1
        if delta < tol:
            return sweeps, True
        while sweeps < max_sweeps:
            delta = _sweep(xf, resid, beta, col_sq, lam, n, True)
            sweeps += 1
            if delta < tol:
                break
    return sweeps, False


@numba.njit(cache=True)
def _kkt(xf, y, beta, lam):
    n = xf.shape[0]
    resid = y - xf @ beta
    worst = 0.0
    for j in range(xf.shape[1]):
        g = 0.0
        for i in range(n):
            g += xf[i, j] * resid[i]
        g /= n
        if beta[j] > 0.0:
            v = abs(g - lam)
        elif beta[j] < 0.0:
            v = abs(g + lam)
        else:
            v = abs(g) - lam
        if v > worst:
            worst = v
    return worst


def default_tol(y) -> float:
    return 1e-8 * (1.0 + float(np.max(np.abs(y))))


class _Problem:
    """Design prepared once (column-major copy, squared column norms) for repeated solves."""

    def __init__(self, x, y):
        self.xf = np.asfortranarray(x, dtype=np.float64)
        self.y = np.ascontiguousarray(y, dtype=np.float64)
        if self.y.shape != (self.xf.shape[0],):
            raise ValueError(f"response has shape {self.y.shape}, design has {self.xf.shape[0]} rows")
        self.col_sq = np.sum(self.xf * self.xf, axis=0)
        self.lmax = lambda_max(self.xf, self.y)

    def solve(self, lam, beta0=None, tol=None, max_iter=DEFAULT_MAX_SWEEPS) -> LassoSolution:
        if lam < 0:
            raise ValueError("lambda must be non-negative")
        p = self.xf.shape[1]
        tol = default_tol(self.y) if tol is None else tol
        if lam >= self.lmax:
            # zero satisfies the optimality conditions exactly
            zero = np.zeros(p)
            return LassoSolution(zero, float(lam), 0, objective(self.xf, self.y, zero, lam),
                                 float(max(_kkt(self.xf, self.y, zero, float(lam)), 0.0)))
        beta = np.zeros(p) if beta0 is None else np.array(beta0, dtype=np.float64)
        total = 0
        sweep_tol = tol
        while True:
            sweeps, swept_out = _cd_kernel(self.xf, self.y, beta, self.col_sq, float(lam), sweep_tol, max_iter - total)
            total += sweeps
            viol = _kkt(self.xf, self.y, beta, float(lam))
            converged = swept_out and viol <= tol
            if converged or total >= max_iter or sweep_tol < tol * 1e-8:
                break
            # updates are below tol but the subgradient residual is not: tighten the sweep criterion
            sweep_tol *= 1e-2
        if not converged:
            log.warning("coordinate descent stopped after %d sweeps at lambda=%g (kkt %.3e)", total, lam, viol)
        return LassoSolution(
            beta_hat=beta,
            lam=float(lam),
            iterations=total,
            objective=objective(self.xf, self.y, beta, lam),
            kkt_violation=float(max(viol, 0.0)),
            converged=converged,
        )


def coordinate_descent(x, y, lam: float, tol: float | None = None, max_iter: int = DEFAULT_MAX_SWEEPS,
                       beta0=None) -> LassoSolution:
    """Solve the Lasso at one lambda. Non-convergence is reported via ``converged=False``."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(np.sum(x * x, axis=0) == 0):
        raise ValueError("design has an all-zero column")
    return _Problem(x, y).solve(lam, beta0=beta0, tol=tol, max_iter=max_iter)


def default_grid(x, y, num: int = 100, ratio: float = 1e-4) -> np.ndarray:
    lmax = lambda_max(x, y)
    return np.geomspace(lmax, ratio * lmax, num)


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-d sequence")
    if np.any(grid <= 0) or np.any(np.diff(grid) >= 0):
        raise ValueError("grid must be strictly descending and positive")
    return grid


def lambda_grid_path(x, y, grid: Sequence[float] | None = None, tol: float | None = None,
                     max_iter: int = DEFAULT_MAX_SWEEPS) -> list[LassoSolution]:
    """Warm-started solutions along a descending lambda grid."""
    grid = default_grid(x, y) if grid is None else _check_grid(grid)
    prob = _Problem(x, y)
    out = []
    beta = None
    for lam in grid:
        sol = prob.solve(lam, beta0=beta, tol=tol, max_iter=max_iter)
        out.append(sol)
        beta = sol.beta_hat
    return out


def recovery_grid(x, y, num: int = 2000, low: float = 1e-6, high: float = 1e3) -> np.ndarray:
    """Log-spaced grid spanning [low, high] x lambda_max, descending."""
    lmax = lambda_max(x, y)
    return np.geomspace(high * lmax, low * lmax, num)


@dataclass(frozen=True)
class GridRecovery:
    success: bool
    lam: float | None       # first grid lambda with correct signs
    solves: int
    max_kkt: float


def grid_sign_recovery(x, y, beta_true, grid=None, tol: float | None = None,
                       max_active: int | None = None) -> GridRecovery:
    """Walk a descending lambda grid and report whether any solution has sign(beta_true).

    The walk stops at the first sign-correct solution. ``max_active`` stops it
    early once the estimate carries more than that many nonzeros; such
    estimates are far from the true support.
    """
    grid = recovery_grid(x, y) if grid is None else _check_grid(grid)
    target = np.sign(np.asarray(beta_true, dtype=np.float64))
    prob = _Problem(x, y)
    beta = None
    worst = 0.0
    for k, lam in enumerate(grid):
        if lam >= prob.lmax:
            # zero is the exact solution here and never carries the true signs
            continue
        sol = prob.solve(lam, beta0=beta, tol=tol)
        beta = sol.beta_hat
        worst = max(worst, sol.kkt_violation)
        if np.array_equal(np.sign(beta), target):
            return GridRecovery(True, float(lam), k + 1, worst)
        if max_active is not None and np.count_nonzero(beta) > max_active:
            return GridRecovery(False, None, k + 1, worst)
    return GridRecovery(False, None, len(grid), worst)


def orthonormal_closed_form(x, y, lam: float) -> np.ndarray:
    """Exact Lasso solution when X^T X / n = I: elementwise soft thresholding."""
    x = np.asarray(x, dtype=np.float64)
    return soft_threshold(x.T @ np.asarray(y, dtype=np.float64) / x.shape[0], lam)
