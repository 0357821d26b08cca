"""Designs, true coefficients, Poisson-like noise and the SNR statistic.

Random numbers
--------------
All Gaussian draws go through :func:`standard_normals`: a Philox-4x64
counter-based generator keyed by ``numpy.random.SeedSequence(seed_material)``
supplies uniforms, which Box-Muller turns into pairs of normals
``sqrt(-2 ln u1) * (cos 2 pi u2, sin 2 pi u2)`` with ``u1`` in (0, 1]. Seed
material is a tuple of non-negative integers, so a per-trial stream is simply
``(master_seed, experiment_id, grid_index, trial_index)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, InfeasibleTarget, ZeroColumn


def _seed_tuple(seed) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def standard_normals(shape, seed) -> np.ndarray:
    """i.i.d. N(0, 1) array of the given shape, deterministic in ``seed``."""
    shape = (shape,) if isinstance(shape, (int, np.integer)) else tuple(shape)
    size = int(np.prod(shape)) if shape else 1
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(list(_seed_tuple(seed)))))
    half = (size + 1) // 2
    u = gen.random((2, half))
    radius = np.sqrt(-2.0 * np.log1p(-u[0]))
    angle = 2.0 * np.pi * u[1]
    z = np.concatenate((radius * np.cos(angle), radius * np.sin(angle)))
    return z[:size].reshape(shape)


@dataclass(frozen=True)
class SparseCoefficients:
    beta: np.ndarray
    support: np.ndarray
    sign_vector: np.ndarray
    min_abs: float
    l2: float
    q: int

    @classmethod
    def from_beta(cls, beta, allow_full: bool = False) -> "SparseCoefficients":
        """``allow_full`` admits q = p (empty complement), used for degenerate checks."""
        beta = linalg.as_vector(beta)
        support = np.flatnonzero(beta)
        q = int(support.size)
        if not (0 < q < beta.size or (allow_full and q == beta.size > 0)):
            raise ValueError(f"support size must satisfy 0 < q < p, got q={q}, p={beta.size}")
        beta.setflags(write=False)
        return cls(
            beta=beta,
            support=support,
            sign_vector=np.sign(beta[support]),
            min_abs=float(np.min(np.abs(beta[support]))),
            l2=linalg.l2_norm(beta),
            q=q,
        )

    @property
    def p(self) -> int:
        return self.beta.size

    @property
    def complement(self) -> np.ndarray:
        mask = np.ones(self.p, dtype=bool)
        mask[self.support] = False
        return np.flatnonzero(mask)

    def scaled(self, c: float) -> "SparseCoefficients":
        return SparseCoefficients.from_beta(c * self.beta, allow_full=self.q == self.p)


class NoiseKind(str, enum.Enum):
    POISSON_LIKE = "poisson_like"
    HOMOSCEDASTIC_MATCHED = "homoscedastic_matched"
    HOMOSCEDASTIC_FIXED = "homoscedastic_fixed"


@dataclass(frozen=True)
class NoiseSpec:
    kind: NoiseKind = NoiseKind.POISSON_LIKE
    sigma2: float = 1.0
    variance: float | None = None  # only for HOMOSCEDASTIC_FIXED

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if self.kind is NoiseKind.HOMOSCEDASTIC_FIXED and not (self.variance is not None and self.variance > 0):
            raise ValueError("a fixed homoscedastic noise spec needs a positive variance")


@dataclass(frozen=True)
class GaussianEnsembleSpec:
    sigma: np.ndarray
    unit_diagonal: bool = True
    chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sigma = linalg._symmetrized(self.sigma)
        if self.unit_diagonal and not np.allclose(np.diag(sigma), 1.0, rtol=0, atol=1e-12):
            raise ValueError("covariance is flagged unit-diagonal but its diagonal is not all ones")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "chol", linalg.cholesky(sigma))

    @property
    def p(self) -> int:
        return self.sigma.shape[0]

    def blocks(self, support) -> tuple[np.ndarray, np.ndarray]:
        """(Sigma_11, Sigma_21) for the given support."""
        support = np.asarray(support, dtype=np.intp)
        mask = np.ones(self.p, dtype=bool)
        mask[support] = False
        comp = np.flatnonzero(mask)
        return self.sigma[np.ix_(support, support)], self.sigma[np.ix_(comp, support)]


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    beta_star: SparseCoefficients
    epsilon: np.ndarray
    y: np.ndarray
    noise: NoiseSpec
    seed_record: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.x.shape[0]


def gen_iid_design(n: int, p: int, seed) -> np.ndarray:
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    return standard_normals((n, p), seed)


def gen_ensemble_design(n: int, spec: GaussianEnsembleSpec, seed) -> np.ndarray:
    """Rows i.i.d. N(0, Sigma): each row is L z with L the lower Cholesky factor."""
    z = standard_normals((n, spec.p), seed)
    return z @ spec.chol.T


def normalize_columns_sqrt_n(x) -> np.ndarray:
    x = linalg.as_matrix(x)
    n = x.shape[0]
    norms = np.sqrt(np.sum(x * x, axis=0))
    if np.any(norms == 0):
        raise ZeroColumn(f"columns {np.flatnonzero(norms == 0).tolist()} are identically zero")
    return x * (math.sqrt(n) / norms)


def make_example_beta(p: int, q: int, beta_max: float, beta_min: float) -> SparseCoefficients:
    """First q/2 coefficients beta_max, next q/2 beta_min, the rest zero."""
    if not (0 < q < p) or q % 2:
        raise ValueError(f"need an even q with 0 < q < p, got q={q}, p={p}")
    if not beta_max >= beta_min > 0:
        raise ValueError("need beta_max >= beta_min > 0")
    beta = np.zeros(p)
    beta[: q // 2] = beta_max
    beta[q // 2 : q] = beta_min
    return SparseCoefficients.from_beta(beta)


def table2_beta(p: int, q: int, n: int, target_snr: float, sigma2: float, l2_target: float) -> SparseCoefficients:
    """Two-level coefficients with a prescribed l2 norm and SNR.

    beta_min = sqrt(SNR sigma2 ||beta||_2 / n), and beta_max fills the rest of
    the norm: beta_max^2 = ||beta||_2^2 / (q/2) - beta_min^2.
    """
    if q % 2 or not 0 < q < p:
        raise ValueError(f"need an even q with 0 < q < p, got q={q}, p={p}")
    if not (target_snr > 0 and sigma2 > 0 and l2_target > 0):
        raise InfeasibleTarget("SNR, sigma2 and the l2 target must be positive")
    beta_min = math.sqrt(target_snr * sigma2 * l2_target / n)
    radicand = l2_target**2 / (q // 2) - beta_min**2
    if radicand <= 0 or math.sqrt(radicand) < beta_min * (1 - 1e-12):
        raise InfeasibleTarget(
            f"SNR {target_snr} with ||beta||_2 = {l2_target} forces beta_min={beta_min:.4g} above beta_max"
        )
    beta_max = max(math.sqrt(radicand), beta_min)
    return make_example_beta(p, q, beta_max, beta_min)


def snr(beta_star: SparseCoefficients, n: int, sigma2: float) -> float:
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    return n * beta_star.min_abs**2 / (sigma2 * beta_star.l2)


def signal_mean(x, beta_star: SparseCoefficients) -> np.ndarray:
    """X(S) beta*(S); the off-support columns are never read."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[1] != beta_star.p:
        raise DimensionMismatch(f"design has {x.shape[1]} columns, beta has {beta_star.p}")
    s = beta_star.support
    return x[:, s] @ beta_star.beta[s]


def noise_sd(x, beta_star: SparseCoefficients, spec: NoiseSpec) -> np.ndarray:
    """Per-observation noise standard deviation under ``spec``."""
    mean_abs = np.abs(signal_mean(x, beta_star))
    if spec.kind is NoiseKind.POISSON_LIKE:
        return np.sqrt(spec.sigma2 * mean_abs)
    if spec.kind is NoiseKind.HOMOSCEDASTIC_MATCHED:
        return np.full(mean_abs.shape, math.sqrt(spec.sigma2 * float(np.mean(mean_abs))))
    return np.full(mean_abs.shape, math.sqrt(spec.variance))


def gen_noise(x, beta_star: SparseCoefficients, spec: NoiseSpec, seed) -> np.ndarray:
    sd = noise_sd(x, beta_star, spec)
    return sd * standard_normals(sd.size, seed)


def response(x, beta_star: SparseCoefficients, epsilon) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    epsilon = np.asarray(epsilon, dtype=np.float64)
    if epsilon.shape != (x.shape[0],):
        raise DimensionMismatch(f"noise has shape {epsilon.shape}, expected ({x.shape[0]},)")
    return x @ beta_star.beta + epsilon


def make_dataset(x, beta_star: SparseCoefficients, noise: NoiseSpec, seed: Sequence[int] | int) -> Dataset:
    x = linalg.as_matrix(x)
    y = response(x, beta_star, gen_noise(x, beta_star, noise, seed))
    # stored noise is re-derived from y so that y - X beta* reproduces it bit for bit
    eps = y - x @ beta_star.beta
    return Dataset(
        x=x,
        beta_star=beta_star,
        epsilon=eps,
        y=y,
        noise=noise,
        seed_record=_seed_tuple(seed),
    )
