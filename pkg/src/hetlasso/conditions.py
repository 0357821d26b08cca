"""Regularity conditions: irrepresentability, Gram eigenvalues, row norms on S."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import NotPositiveDefinite, SingularGram
from .model import GaussianEnsembleSpec, SparseCoefficients


@dataclass(frozen=True)
class ConditionReport:
    ic_lhs: float
    eta: float                # 1 - ic_lhs; <= 0 means the condition fails
    c_min: float
    c_max: float
    max_row_norm_s: float
    holds_ic: bool
    holds_min_eigen: bool


def _split(x, support):
    x = np.asarray(x, dtype=np.float64)
    support = np.asarray(support, dtype=np.intp)
    mask = np.ones(x.shape[1], dtype=bool)
    mask[support] = False
    return x[:, support], x[:, mask]


def irrepresentable_lhs(x, support, sign_vector) -> float:
    """|| X(S^c)^T X(S) (X(S)^T X(S))^{-1} b ||_inf; zero when S^c is empty."""
    xs, xc = _split(x, support)
    try:
        w = linalg.solve_spd(xs.T @ xs, np.asarray(sign_vector, dtype=np.float64))
    except NotPositiveDefinite as exc:
        raise SingularGram(str(exc)) from exc
    if xc.shape[1] == 0:
        return 0.0
    return linalg.inf_norm(xc.T @ (xs @ w))


def population_ic_lhs(spec: GaussianEnsembleSpec, support, sign_vector) -> float:
    s11, s21 = spec.blocks(support)
    if s21.shape[0] == 0:
        return 0.0
    return linalg.inf_norm(s21 @ linalg.solve_spd(s11, np.asarray(sign_vector, dtype=np.float64)))


def gram_eigen_bounds(x, support) -> tuple[float, float]:
    """Extreme eigenvalues of X(S)^T X(S) / n; c_min is clipped at 0."""
    xs, _ = _split(x, support)
    if xs.shape[1] == 0:
        raise ValueError("support must be non-empty")
    ev = linalg.symmetric_eigenvalues(xs.T @ xs / xs.shape[0])
    return max(float(ev[0]), 0.0), float(ev[-1])


def max_row_norm_s(x, support) -> float:
    xs, _ = _split(x, support)
    return float(np.sqrt(np.max(np.sum(xs * xs, axis=1))))


def check_conditions(x, beta_star: SparseCoefficients, eta_threshold: float = 0.0,
                     c_min_threshold: float = 0.0) -> ConditionReport:
    """All fixed-design conditions at once.

    ``holds_ic`` is ``ic_lhs <= 1 - eta_threshold`` (strictly below 1 when the
    threshold is 0); ``holds_min_eigen`` is ``c_min > c_min_threshold``.
    """
    c_min, c_max = gram_eigen_bounds(x, beta_star.support)
    lhs = irrepresentable_lhs(x, beta_star.support, beta_star.sign_vector)
    holds_ic = lhs < 1.0 if eta_threshold == 0 else lhs <= 1.0 - eta_threshold
    return ConditionReport(
        ic_lhs=lhs,
        eta=1.0 - lhs,
        c_min=c_min,
        c_max=c_max,
        max_row_norm_s=max_row_norm_s(x, beta_star.support),
        holds_ic=holds_ic,
        holds_min_eigen=c_min > c_min_threshold,
    )
