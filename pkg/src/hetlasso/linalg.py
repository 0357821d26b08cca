"""Dense real linear-algebra kernels.

Matrices and vectors are plain float64 numpy arrays. The constructors
``as_matrix`` / ``as_vector`` enforce shape and finiteness; every other kernel
calls them on its inputs so NaN/Inf never enters a computation silently.

The SPD solve (Cholesky) and the symmetric eigensolver (cyclic Jacobi) are
written out here rather than delegated to LAPACK. Only the matrix product
goes through numpy's BLAS.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NonFiniteValue, NonSymmetric, NotPositiveDefinite

PIVOT_RTOL = 1e-12
SYMMETRY_TOL = 1e-10
JACOBI_RTOL = 1e-11
JACOBI_MAX_SWEEPS = 100
POWER_RTOL = 1e-8
POWER_MAX_ITER = 10_000


def as_matrix(a) -> np.ndarray:
    m = np.array(a, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteValue("matrix has non-finite entries")
    return m


def as_vector(v) -> np.ndarray:
    x = np.array(v, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch(f"expected a 1-d vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue("vector has non-finite entries")
    return x


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim not in (1, 2):
        raise DimensionMismatch(f"cannot multiply shapes {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"inner dimensions differ: {a.shape} x {b.shape}")
    return a @ b


def cholesky(a) -> np.ndarray:
    """Lower-triangular L with L L^T = a.

    Raises NotPositiveDefinite when a pivot falls to or below
    ``PIVOT_RTOL * max(diag(a))``.
    """
    a = as_matrix(a)
    n = a.shape[0]
    if a.shape[1] != n:
        raise DimensionMismatch(f"Cholesky needs a square matrix, got {a.shape}")
    if n == 0:
        return np.zeros((0, 0))
    tol = PIVOT_RTOL * max(float(np.max(np.diag(a))), 0.0)
    L = np.zeros_like(a)
    for j in range(n):
        row = L[j, :j]
        pivot = a[j, j] - row @ row
        if not pivot > tol:
            raise NotPositiveDefinite(f"pivot {pivot:.3e} at column {j} is not above tolerance {tol:.3e}")
        ljj = math.sqrt(pivot)
        L[j, j] = ljj
        if j + 1 < n:
            L[j + 1:, j] = (a[j + 1:, j] - L[j + 1:, :j] @ row) / ljj
    return L


def _forward(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    y = np.empty_like(b)
    for i in range(L.shape[0]):
        y[i] = (b[i] - L[i, :i] @ y[:i]) / L[i, i]
    return y


def _backward_transposed(L: np.ndarray, y: np.ndarray) -> np.ndarray:
    # solves L^T x = y
    n = L.shape[0]
    x = np.empty_like(y)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - L[i + 1:, i] @ x[i + 1:]) / L[i, i]
    return x


def cho_solve(L: np.ndarray, b) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != L.shape[0]:
        raise DimensionMismatch(f"right-hand side has {b.shape[0]} rows, factor has {L.shape[0]}")
    return _backward_transposed(L, _forward(L, b))


def solve_spd(a, b) -> np.ndarray:
    """Solve ``a x = b`` for symmetric positive definite ``a``.

    ``b`` may be a vector or a matrix of right-hand sides.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.ndim == 1:
        b = as_vector(b)
    else:
        b = as_matrix(b)
    return cho_solve(cholesky(a), b)


def _symmetrized(a) -> np.ndarray:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise NonSymmetric(f"matrix of shape {a.shape} is not square")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.T)) > SYMMETRY_TOL * scale:
        raise NonSymmetric("matrix is not symmetric within tolerance")
    return 0.5 * (a + a.T)


def symmetric_eigenvalues(a, max_sweeps: int = JACOBI_MAX_SWEEPS) -> np.ndarray:
    """All eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations."""
    a = _symmetrized(a)
    n = a.shape[0]
    if n <= 1:
        return np.diag(a).copy()
    fro = float(np.linalg.norm(a))
    if fro == 0.0:
        return np.zeros(n)
    target = JACOBI_RTOL * fro
    iu = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        off = math.sqrt(2.0 * float(np.sum(a[iu] ** 2)))
        if off <= target:
            return np.sort(np.diag(a))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                diff = a[q, q] - a[p, p]
                if abs(apq) <= 1e-150 * abs(diff):
                    # rotation angle underflows; the entry is negligible
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = diff / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
    off = math.sqrt(2.0 * float(np.sum(a[iu] ** 2)))
    if off <= target:
        return np.sort(np.diag(a))
    raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps (off={off:.3e})")


def power_lambda_max(a, rtol: float = POWER_RTOL, max_iter: int = POWER_MAX_ITER) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration.

    Stops when the eigen-residual ``||A v - mu v||`` drops to ``rtol * mu``.
    """
    a = _symmetrized(a)
    n = a.shape[0]
    if n == 0:
        raise DimensionMismatch("empty matrix has no eigenvalues")
    # deterministic start with no special alignment to coordinate axes
    v = 1.0 + np.arange(n, dtype=np.float64) / (7.0 * n)
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        w = a @ v
        mu = float(v @ w)
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            return 0.0
        if np.linalg.norm(w - mu * v) <= rtol * abs(mu):
            return mu
        v = w / norm_w
    raise NoConvergence(f"power iteration did not converge in {max_iter} iterations")


def inf_norm(v) -> float:
    v = as_vector(v)
    return float(np.max(np.abs(v))) if v.size else 0.0


def l2_norm(v) -> float:
    v = as_vector(v)
    return float(math.sqrt(v @ v))


def column_slice(x, idx: Sequence[int]) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    idx = np.asarray(idx, dtype=np.intp).reshape(-1)
    p = x.shape[1]
    if idx.size and (idx.min() < 0 or idx.max() >= p):
        raise IndexError(f"column index out of range for {p} columns")
    if np.unique(idx).size != idx.size:
        raise ValueError("column indices must be distinct")
    return x[:, idx]
