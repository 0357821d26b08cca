"""Closed-form evaluators for the sign-recovery bounds.

Fixed design quantities (Psi, the probability lower bound at a given lambda,
the recommended lambda and Gamma, the necessary-condition ceiling c_n) take a
:class:`FixedDesignBoundInputs`; Gaussian random design quantities (V*, A,
Psi-tilde, Gamma-tilde, ...) take a :class:`RandomDesignBoundInputs`.

Probability bounds are returned as :class:`BoundReport` with the raw value kept
next to the [0, 1]-clamped one. A raw value below zero means the bound is
vacuous at these inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import conditions, linalg
from .model import GaussianEnsembleSpec, SparseCoefficients

# constant from the Gaussian eigenvalue concentration step
EIGEN_RATE = 0.03
IC_VIOLATION_CEILING = 0.5


@dataclass(frozen=True)
class BoundReport:
    raw: float
    raw_exponent: float | None = None
    hypotheses: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return min(max(self.raw, 0.0), 1.0)

    @property
    def clamped(self) -> bool:
        return self.value != self.raw

    @property
    def vacuous(self) -> bool:
        return self.raw <= 0.0

    @property
    def hypotheses_met(self) -> bool:
        return all(bool(v) for v in self.hypotheses.values())

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "raw": self.raw,
            "raw_exponent": self.raw_exponent,
            "clamped": self.clamped,
            "hypotheses": {k: bool(v) for k, v in self.hypotheses.items()},
        }


@dataclass(frozen=True)
class FixedDesignBoundInputs:
    n: int
    p: int
    q: int
    sigma2: float
    eta: float
    c_min: float
    max_row_norm_s: float
    l2_beta: float
    m_beta: float
    h_inf: float                 # || (X(S)^T X(S) / n)^{-1} b ||_inf
    columns_sqrt_n: bool | None = None

    @classmethod
    def from_data(cls, x, beta_star: SparseCoefficients, sigma2: float) -> "FixedDesignBoundInputs":
        x = np.asarray(x, dtype=np.float64)
        n = x.shape[0]
        report = conditions.check_conditions(x, beta_star)
        xs = x[:, beta_star.support]
        h = linalg.solve_spd(xs.T @ xs / n, beta_star.sign_vector)
        norms = np.sqrt(np.sum(x * x, axis=0))
        return cls(
            n=n, p=x.shape[1], q=beta_star.q, sigma2=sigma2,
            eta=report.eta, c_min=report.c_min, max_row_norm_s=report.max_row_norm_s,
            l2_beta=beta_star.l2, m_beta=beta_star.min_abs, h_inf=linalg.inf_norm(h),
            columns_sqrt_n=bool(np.allclose(norms, math.sqrt(n), rtol=1e-10, atol=0)),
        )

    @property
    def snr(self) -> float:
        return self.n * self.m_beta**2 / (self.sigma2 * self.l2_beta)

    @property
    def lambda_scale(self) -> float:
        """eta C_min^{-1/2} + sqrt(q) / C_min."""
        return self.eta / math.sqrt(self.c_min) + math.sqrt(self.q) / self.c_min


def psi_fixed(inp: FixedDesignBoundInputs, lam: float) -> float:
    return lam * (inp.eta / math.sqrt(inp.c_min) + inp.h_inf)


def thm1_exponent(inp: FixedDesignBoundInputs, lam: float) -> float:
    return inp.n * lam**2 * inp.eta**2 / (2 * inp.sigma2 * inp.l2_beta * inp.max_row_norm_s)


def thm1_probability(inp: FixedDesignBoundInputs, lam: float) -> BoundReport:
    """1 - 2 exp{-n lambda^2 eta^2 / (2 sigma^2 ||beta*|| max_i ||x_i(S)||) + log p}."""
    e = thm1_exponent(inp, lam)
    hyp = {
        "m_beta_exceeds_psi": inp.m_beta > psi_fixed(inp, lam),
        "irrepresentable": 0 < inp.eta <= 1,
        "min_eigen": inp.c_min > 0,
    }
    if inp.columns_sqrt_n is not None:
        hyp["columns_sqrt_n"] = inp.columns_sqrt_n
    return BoundReport(raw=1.0 - 2.0 * math.exp(math.log(inp.p) - e), raw_exponent=e, hypotheses=hyp)


def corollary1_lambda(inp: FixedDesignBoundInputs) -> float:
    return inp.m_beta / (2 * inp.lambda_scale)


@dataclass(frozen=True)
class GammaResult:
    gamma: float
    probability: BoundReport


def gamma_fixed(inp: FixedDesignBoundInputs) -> GammaResult:
    """Gamma and the implied bound 1 - 2 exp{-(Gamma - 1) log(p + 1)}."""
    log_p1 = math.log(inp.p + 1)
    gamma = inp.eta**2 * inp.snr / (8 * inp.max_row_norm_s * inp.lambda_scale**2 * log_p1)
    raw = 1.0 - 2.0 * math.exp(-(gamma - 1.0) * log_p1)
    return GammaResult(gamma, BoundReport(raw=raw, raw_exponent=(gamma - 1.0) * log_p1,
                                          hypotheses={"irrepresentable": 0 < inp.eta <= 1}))


def normal_tail_ceiling(c: np.ndarray | float):
    """1 - exp(-c^2/2) / (sqrt(2 pi) (1 + c))."""
    c = np.asarray(c, dtype=np.float64)
    return 1.0 - np.exp(-0.5 * c * c) / (math.sqrt(2 * math.pi) * (1.0 + c))


@dataclass(frozen=True)
class NecessaryResult:
    c_n: float
    per_j: np.ndarray            # c_{n,j} over the support, in support order
    ceiling: float               # from c_n = min_j c_{n,j}
    per_j_ceiling: np.ndarray
    orthonormal_gram: bool       # X(S)^T X(S) / n == I within 1e-8


def cn_necessary(x, beta_star: SparseCoefficients, sigma2: float) -> NecessaryResult:
    """c_{n,j}^2 = n^2 beta_j^2 / (sigma^2 e_j^T [X(S)^T diag(|X beta*|) X(S)] e_j)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    xs = x[:, beta_star.support]
    weights = np.abs(x @ beta_star.beta)
    denom = sigma2 * (weights @ (xs * xs))
    with np.errstate(divide="ignore"):
        cnj = np.sqrt(n**2 * beta_star.beta[beta_star.support] ** 2 / denom)
    c_n = float(np.min(cnj))
    gram = xs.T @ xs / n
    return NecessaryResult(
        c_n=c_n,
        per_j=cnj,
        ceiling=float(normal_tail_ceiling(c_n)),
        per_j_ceiling=normal_tail_ceiling(cnj),
        orthonormal_gram=bool(np.max(np.abs(gram - np.eye(gram.shape[0]))) <= 1e-8),
    )


def ic_violation_ceiling() -> float:
    """Upper bound on P[sign recovery] once the irrepresentable quantity reaches 1."""
    return IC_VIOLATION_CEILING


@dataclass(frozen=True)
class RandomDesignBoundInputs:
    n: int
    p: int
    q: int
    sigma2: float
    eta: float
    ctilde_min: float
    ctilde_max: float
    l2_beta: float
    m_beta: float

    def __post_init__(self):
        if self.ctilde_min > self.ctilde_max:
            raise ValueError("ctilde_min must not exceed ctilde_max")

    @classmethod
    def from_spec(cls, spec: GaussianEnsembleSpec, beta_star: SparseCoefficients, n: int,
                  sigma2: float) -> "RandomDesignBoundInputs":
        s11, _ = spec.blocks(beta_star.support)
        lam_max = (linalg.symmetric_eigenvalues(spec.sigma)[-1] if spec.p <= 50
                   else linalg.power_lambda_max(spec.sigma))
        return cls(
            n=n, p=spec.p, q=beta_star.q, sigma2=sigma2,
            eta=1.0 - conditions.population_ic_lhs(spec, beta_star.support, beta_star.sign_vector),
            ctilde_min=float(linalg.symmetric_eigenvalues(s11)[0]),
            ctilde_max=float(lam_max),
            l2_beta=beta_star.l2, m_beta=beta_star.min_abs,
        )

    @property
    def q_over_n(self) -> float:
        return self.q / self.n

    @property
    def snr(self) -> float:
        return self.n * self.m_beta**2 / (self.sigma2 * self.l2_beta)


def v_star(inp: RandomDesignBoundInputs, lam: float) -> float:
    return (2 * lam**2 * inp.q / (inp.n * inp.ctilde_min)
            + 3 * inp.sigma2 * math.sqrt(inp.ctilde_max) * inp.l2_beta / inp.n)


def _row_norm_level(q: int, n: int) -> float:
    return max(16 * q, 4 * math.log(n))


def a_quantity(inp: RandomDesignBoundInputs) -> float:
    return math.sqrt(4 * inp.sigma2 * inp.l2_beta * math.log(inp.n) * math.sqrt(2 * _row_norm_level(inp.q, inp.n))
                     / (inp.n * inp.ctilde_min))


def psi_tilde(inp: RandomDesignBoundInputs, lam: float) -> float:
    return a_quantity(inp) + 2 * lam * math.sqrt(inp.q) / inp.ctilde_min


def thm3_exponent(inp: RandomDesignBoundInputs, lam: float) -> float:
    return lam**2 * inp.eta**2 / (2 * v_star(inp, lam) * inp.ctilde_max)


def _design_penalty(inp: RandomDesignBoundInputs) -> float:
    return (2 * inp.q + 3) * math.exp(-EIGEN_RATE * inp.n) + (1 + 3 * inp.q) / inp.n


def _random_hypotheses(inp: RandomDesignBoundInputs) -> dict:
    return {
        "irrepresentable": 0 < inp.eta <= 1,
        "eigen": 0 < inp.ctilde_min <= inp.ctilde_max,
        # the eigenvalue concentration step needs sqrt(q/n) < 0.1
        "q_over_n_small": math.sqrt(inp.q_over_n) < 0.1,
    }


def thm3_probability(inp: RandomDesignBoundInputs, lam: float) -> BoundReport:
    e = thm3_exponent(inp, lam)
    raw = 1.0 - 2.0 * math.exp(math.log(inp.p - inp.q) - e) - _design_penalty(inp)
    hyp = {"m_beta_exceeds_psi_tilde": inp.m_beta > psi_tilde(inp, lam), **_random_hypotheses(inp)}
    return BoundReport(raw=raw, raw_exponent=e, hypotheses=hyp)


def corollary3_lambda(inp: RandomDesignBoundInputs) -> float:
    """(M(beta*) - A) C~_min / (4 sqrt q); negative when M <= A (see corollary3)."""
    return (inp.m_beta - a_quantity(inp)) * inp.ctilde_min / (4 * math.sqrt(inp.q))


def gamma_tilde(inp: RandomDesignBoundInputs) -> float:
    log_pq = math.log(inp.p - inp.q + 1)
    gap = inp.m_beta - a_quantity(inp)
    inner = (4 * inp.q * log_pq * inp.ctilde_max / inp.ctilde_min
             + 96 * inp.sigma2 * inp.q * inp.l2_beta * log_pq * math.sqrt(inp.ctilde_max**3)
             / (gap**2 * inp.ctilde_min**2))
    return inp.n * inp.eta**2 / inner


def snr_random_threshold(inp: RandomDesignBoundInputs) -> float:
    """SNR level 8 C~_min^{-1} log n sqrt(2 max(4q, log n)), equivalent to M(beta*) >= A."""
    return 8 / inp.ctilde_min * math.log(inp.n) * math.sqrt(2 * max(4 * inp.q, math.log(inp.n)))


@dataclass(frozen=True)
class Corollary3Result:
    lam: float
    gamma_tilde: float
    probability: BoundReport
    flags: dict


def corollary3(inp: RandomDesignBoundInputs) -> Corollary3Result:
    """Recommended lambda, Gamma-tilde and the implied probability bound.

    A violated M(beta*) > A is reported in ``flags`` rather than raised; the
    numbers are still returned for diagnostics.
    """
    lam = corollary3_lambda(inp)
    gt = gamma_tilde(inp)
    log_pq = math.log(inp.p - inp.q + 1)
    raw = 1.0 - 2.0 * math.exp(-log_pq * (gt - 1.0)) - _design_penalty(inp)
    flags = {
        "m_beta_exceeds_a": inp.m_beta > a_quantity(inp),
        "snr_above_random_threshold": inp.snr >= snr_random_threshold(inp),
        # finite-n proxy for SNR growing faster than q log(p - q + 1)
        "snr_over_q_log": inp.snr / (inp.q * log_pq),
    }
    return Corollary3Result(lam, gt, BoundReport(raw=raw, raw_exponent=log_pq * gt,
                                                 hypotheses=_random_hypotheses(inp)), flags)
