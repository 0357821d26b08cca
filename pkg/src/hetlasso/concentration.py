"""Tail bounds used in the sign-recovery analysis, with Monte Carlo validators.

Each validator estimates the probability of a "bad" event by simulation and
compares it to the closed-form upper bound, allowing three binomial standard
errors of slack (computed at the bound, clipped to [0, 1]).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DomainError
from .model import standard_normals

STDERR_SLACK = 3.0
WISHART_RATE = 0.03
WISHART_QN_LIMIT = 0.2

# experiment ids for seed material
_GAUSS_MAX, _CHI2_MAX, _WISHART, _ROW_NORM = 101, 102, 103, 104


@dataclass(frozen=True)
class TailCheckResult:
    bound: float          # upper bound on the probability of the bad event
    empirical: float      # observed frequency of the bad event
    trials: int
    passed: bool
    flags: dict = field(default_factory=dict)


def _judge(bound: float, hits: int, trials: int, flags=None) -> TailCheckResult:
    if trials < 1:
        raise ValueError("need at least one trial")
    b = min(max(bound, 0.0), 1.0)
    slack = STDERR_SLACK * math.sqrt(b * (1 - b) / trials)
    emp = hits / trials
    return TailCheckResult(bound=bound, empirical=emp, trials=trials, passed=emp <= bound + slack, flags=flags or {})


def gaussian_max_tail_bound(n: int, t: float, max_var: float) -> float:
    """P(max_i |X_i| >= t) <= 2 n exp(-t^2 / (2 max_i E X_i^2)) for a centred Gaussian vector."""
    if not (t > 0 and max_var > 0):
        raise DomainError("need t > 0 and max_var > 0")
    return 2 * n * math.exp(-t * t / (2 * max_var))


def chi2_max_tail_bound(n: int, q: int, t: float) -> float:
    """P(max of n i.i.d. chi2_q > 2t) <= n exp(-t (1 - 2 sqrt(q/t))), valid for t > q."""
    if not t > q:
        raise DomainError(f"bound needs t > q (t={t}, q={q})")
    return n * math.exp(-t * (1 - 2 * math.sqrt(q / t)))


def row_norm_threshold(n: int, q: int, ctilde_max: float) -> float:
    """2 C~_max max(16 q, 4 log n)."""
    return 2 * ctilde_max * max(16 * q, 4 * math.log(n))


def _batched_normals(trials: int, shape, seed, batch: int):
    for start in range(0, trials, batch):
        k = min(batch, trials - start)
        yield standard_normals((k, *shape), (*seed, start))


def gaussian_max_check(n: int, t: float, trials: int, seed: int, batch: int = 10_000) -> TailCheckResult:
    """i.i.d. N(0, 1) coordinates: frequency of max |X_i| >= t vs the bound."""
    hits = 0
    for z in _batched_normals(trials, (n,), (seed, _GAUSS_MAX), batch):
        hits += int(np.sum(np.max(np.abs(z), axis=1) >= t))
    return _judge(gaussian_max_tail_bound(n, t, 1.0), hits, trials)


def chi2_max_check(n: int, q: int, t: float, trials: int, seed: int, batch: int = 5_000) -> TailCheckResult:
    hits = 0
    for z in _batched_normals(trials, (n, q), (seed, _CHI2_MAX), batch):
        chi2 = np.sum(z * z, axis=2)
        hits += int(np.sum(np.max(chi2, axis=1) > 2 * t))
    return _judge(chi2_max_tail_bound(n, q, t), hits, trials)


def wishart_eigen_check(n: int, q: int, sigma11, trials: int, seed: int) -> TailCheckResult:
    """Frequency with which some eigenvalue of X^T X / n leaves [C~_min / 2, 2 C~_max].

    Rows of X are i.i.d. N(0, sigma11). The bound on that frequency is
    2 exp(-0.03 n). ``flags['q_over_n_small']`` is False when q/n > 0.2.
    """
    sigma11 = linalg.as_matrix(sigma11)
    if sigma11.shape != (q, q):
        raise ValueError(f"sigma11 must be {q}x{q}")
    ev = linalg.symmetric_eigenvalues(sigma11)
    lo, hi = ev[0] / 2, 2 * ev[-1]
    chol = linalg.cholesky(sigma11)
    hits = 0
    worst = [np.inf, -np.inf]
    for k in range(trials):
        x = standard_normals((n, q), (seed, _WISHART, k)) @ chol.T
        lam = linalg.symmetric_eigenvalues(x.T @ x / n)
        worst[0] = min(worst[0], lam[0])
        worst[1] = max(worst[1], lam[-1])
        hits += int(lam[0] < lo or lam[-1] > hi)
    flags = {
        "q_over_n_small": q / n <= WISHART_QN_LIMIT,
        "interval": (float(lo), float(hi)),
        "observed_range": (float(worst[0]), float(worst[1])),
    }
    return _judge(2 * math.exp(-WISHART_RATE * n), hits, trials, flags)


def row_norm_bound_check(n: int, q: int, ctilde_max: float, trials: int, seed: int,
                         sigma11=None) -> TailCheckResult:
    """Frequency of max_i ||x_i(S)||^2 >= 2 C~_max max(16q, 4 log n), against 1/n.

    Rows are N(0, sigma11) with sigma11 = C~_max I unless given.
    """
    chol = (math.sqrt(ctilde_max) * np.eye(q) if sigma11 is None
            else linalg.cholesky(sigma11))
    thr = row_norm_threshold(n, q, ctilde_max)
    hits = 0
    for k in range(trials):
        x = standard_normals((n, q), (seed, _ROW_NORM, k)) @ chol.T
        hits += int(np.max(np.sum(x * x, axis=1)) >= thr)
    return _judge(1.0 / n, hits, trials, {"threshold": thr})
