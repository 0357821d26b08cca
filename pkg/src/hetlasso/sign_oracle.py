"""Exact sign-recovery decisions from the Lasso KKT conditions.

With b = sign(beta*(S)), G = X(S)^T X(S) / n and P the projection onto the
column span of X(S), a sign-correct Lasso solution exists at lambda > 0 iff

    |lambda d_j - r_j| <= lambda             for every j outside S,   (R1)
    b_i (beta*_i + g_i - lambda h_i) > 0     for every i in S,        (R2)

where d_j = X_j^T X(S) (X(S)^T X(S))^{-1} b, r_j = X_j^T (P - I) eps / n,
g = G^{-1} X(S)^T eps / n and h = G^{-1} b. Each inequality is a half-line in
lambda, so the feasible set is an interval. (R1) is taken strictly, which is
what makes the sign-correct solution unique; a zero-width interval therefore
counts as failure and is flagged as ``boundary_only``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NotPositiveDefinite, SingularGram
from .model import SparseCoefficients


def sign(x):
    return np.sign(x)


def sign_equal(a, b) -> bool:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"length mismatch: {a.shape} vs {b.shape}")
    return bool(np.array_equal(np.sign(a), np.sign(b)))


@dataclass(frozen=True)
class KktDecomposition:
    d: np.ndarray   # over S^c
    r: np.ndarray   # over S^c (trailing axis: trials, when batched)
    g: np.ndarray   # over S
    h: np.ndarray   # over S


@dataclass(frozen=True)
class RecoveryVerdict:
    feasible_low: float
    feasible_high: float          # np.inf when unbounded above
    nonempty: bool
    boundary_only: bool           # low == high: feasible only with non-strict (R1)
    low_binding: tuple[str, int] | None
    high_binding: tuple[str, int] | None
    diagnostics: dict = field(default_factory=dict, repr=False)

    @property
    def width(self) -> float:
        return max(self.feasible_high - self.feasible_low, 0.0)

    def contains(self, lam: float) -> bool:
        return self.nonempty and self.feasible_low < lam < self.feasible_high

    def as_dict(self) -> dict:
        def enc(v):
            return "inf" if v == np.inf else float(v)
        return {
            "feasible_low": enc(self.feasible_low),
            "feasible_high": enc(self.feasible_high),
            "nonempty": self.nonempty,
            "boundary_only": self.boundary_only,
            "low_binding": list(self.low_binding) if self.low_binding else None,
            "high_binding": list(self.high_binding) if self.high_binding else None,
        }


def _half_line(alpha, kappa):
    """Lambda range where alpha - lambda * kappa > 0, as (low, high) open bounds."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = alpha / kappa
    low = np.where(kappa < 0, ratio, -np.inf)
    high = np.where(kappa > 0, ratio, np.inf)
    dead = (kappa == 0) & ~(alpha > 0)
    low = np.where(dead, np.inf, low)
    high = np.where(dead, -np.inf, high)
    return low, high


class KktSystem:
    """Everything in the KKT reduction that depends only on (X, beta*).

    Precomputed once so that many noise draws against a fixed design cost one
    matrix product each.
    """

    def __init__(self, x, beta_star: SparseCoefficients):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1] != beta_star.p:
            raise DimensionMismatch(f"design has {x.shape[1]} columns, beta has {beta_star.p}")
        self.n = x.shape[0]
        self.beta_star = beta_star
        self.support = beta_star.support
        self.complement = beta_star.complement
        self.b = beta_star.sign_vector
        self.xs = x[:, self.support]
        self.xc = x[:, self.complement]
        gram = self.xs.T @ self.xs / self.n
        try:
            self.chol = linalg.cholesky(gram)
        except NotPositiveDefinite as exc:
            raise SingularGram(f"X(S)^T X(S) is not invertible: {exc}") from exc
        self.h = linalg.cho_solve(self.chol, self.b)
        self.d = self.xc.T @ (self.xs @ self.h) / self.n
        self.abs_beta_s = np.abs(beta_star.beta[self.support])

    def decompose(self, eps) -> KktDecomposition:
        eps = np.asarray(eps, dtype=np.float64)
        if eps.shape[0] != self.n:
            raise DimensionMismatch(f"noise has {eps.shape[0]} rows, design has {self.n}")
        g = linalg.cho_solve(self.chol, self.xs.T @ eps / self.n)
        # (P - I) eps = X(S) g - eps
        r = self.xc.T @ (self.xs @ g - eps) / self.n
        return KktDecomposition(d=self.d, r=r, g=g, h=self.h)

    def _constraint_bounds(self, dec: KktDecomposition):
        d = dec.d if dec.r.ndim == 1 else dec.d[:, None]
        b = self.b if dec.g.ndim == 1 else self.b[:, None]
        h = dec.h if dec.g.ndim == 1 else dec.h[:, None]
        abs_beta = self.abs_beta_s if dec.g.ndim == 1 else self.abs_beta_s[:, None]
        lo_up, hi_up = _half_line(-dec.r, -(d + 1.0))     # r_j < lambda (d_j + 1)
        lo_dn, hi_dn = _half_line(dec.r, d - 1.0)         # lambda (d_j - 1) < r_j
        r1_low = np.maximum(lo_up, lo_dn)
        r1_high = np.minimum(hi_up, hi_dn)
        r2_low, r2_high = _half_line(abs_beta + b * dec.g, np.broadcast_to(b * h, dec.g.shape))
        return r1_low, r1_high, r2_low, r2_high

    def intervals(self, eps) -> tuple[np.ndarray, np.ndarray]:
        """Feasible (low, high) for a batch of noise vectors (columns of ``eps``)."""
        eps = np.asarray(eps, dtype=np.float64)
        single = eps.ndim == 1
        dec = self.decompose(eps[:, None] if single else eps)
        r1_low, r1_high, r2_low, r2_high = self._constraint_bounds(dec)
        low = np.maximum(0.0, np.maximum(_colmax(r1_low), _colmax(r2_low)))
        high = np.minimum(_colmin(r1_high), _colmin(r2_high))
        if single:
            return low[0], high[0]
        return low, high

    def successes(self, eps) -> np.ndarray:
        low, high = self.intervals(eps)
        return np.asarray(low < high)

    def verdict(self, eps) -> RecoveryVerdict:
        eps = np.asarray(eps, dtype=np.float64)
        if eps.ndim != 1:
            raise DimensionMismatch("verdict takes a single noise vector")
        dec = self.decompose(eps)
        r1_low, r1_high, r2_low, r2_high = self._constraint_bounds(dec)
        lows = np.concatenate(([0.0], r1_low, r2_low))
        highs = np.concatenate(([np.inf], r1_high, r2_high))
        labels = [("lambda>0", -1)] + [("R1", int(j)) for j in self.complement] + [("R2", int(i)) for i in self.support]
        k_low = int(np.argmax(lows))
        k_high = int(np.argmin(highs))
        low, high = float(lows[k_low]), float(highs[k_high])
        return RecoveryVerdict(
            feasible_low=low,
            feasible_high=high,
            nonempty=low < high,
            boundary_only=low == high,
            low_binding=labels[k_low] if low > 0 else None,
            high_binding=labels[k_high] if high < np.inf else None,
            diagnostics={
                "r1_low": r1_low, "r1_high": r1_high,
                "r2_low": r2_low, "r2_high": r2_high,
                "r2_ties": int(np.sum((dec.h == 0) & (self.abs_beta_s + self.b * dec.g == 0))),
            },
        )

    def u(self, eps, lam: float) -> np.ndarray:
        dec = self.decompose(eps)
        return dec.g - lam * dec.h

    def v(self, eps, lam: float) -> np.ndarray:
        dec = self.decompose(eps)
        return lam * dec.d - dec.r

    def r3_estimate(self, eps, lam: float) -> np.ndarray:
        """The candidate solution (beta*(S) + g - lambda h, 0)."""
        beta_hat = np.zeros(self.beta_star.p)
        beta_hat[self.support] = self.beta_star.beta[self.support] + self.u(eps, lam)
        return beta_hat


def _colmax(a: np.ndarray) -> np.ndarray:
    return np.max(a, axis=0) if a.shape[0] else np.full(a.shape[1:], -np.inf)


def _colmin(a: np.ndarray) -> np.ndarray:
    return np.min(a, axis=0) if a.shape[0] else np.full(a.shape[1:], np.inf)


def kkt_decompose(x, epsilon, beta_star: SparseCoefficients) -> KktDecomposition:
    return KktSystem(x, beta_star).decompose(epsilon)


def feasible_lambda_interval(x, y, beta_star: SparseCoefficients) -> RecoveryVerdict:
    x = np.asarray(x, dtype=np.float64)
    eps = np.asarray(y, dtype=np.float64) - x @ beta_star.beta
    return KktSystem(x, beta_star).verdict(eps)


def compute_u(x, epsilon, beta_star: SparseCoefficients, lam: float) -> np.ndarray:
    return KktSystem(x, beta_star).u(epsilon, lam)


def compute_v(x, epsilon, beta_star: SparseCoefficients, lam: float) -> np.ndarray:
    return KktSystem(x, beta_star).v(epsilon, lam)


def events(x, epsilon, beta_star: SparseCoefficients, lam: float) -> dict[str, bool]:
    """M(V) = {max |V_j| < lambda} and M(U) = {max |U_i| < M(beta*)}."""
    system = KktSystem(x, beta_star)
    v = system.v(epsilon, lam)
    u = system.u(epsilon, lam)
    m_v = bool(np.max(np.abs(v)) < lam) if v.size else lam > 0
    return {"m_v": m_v, "m_u": bool(np.max(np.abs(u)) < beta_star.min_abs)}
