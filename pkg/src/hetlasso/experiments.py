"""Monte Carlo harness: parameter tables, success-probability curves, output files.

Every curve uses one design matrix X ~ N(0, 1)^{n x p}, drawn once from
``design_fixed_seed`` and reused everywhere. Noise for trial ``t`` at grid
point ``k`` of design ``d`` is seeded by ``(master_seed, d, k, t)``; the seed
does not depend on the noise arm, so the Poisson-like and homoscedastic arms
see the same standard-normal draws (common random numbers).

Success in a trial means the exact feasible-lambda interval is non-empty.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from statistics import NormalDist
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from . import bounds, conditions, linalg, solver
from .errors import SingularGram
from .model import (NoiseKind, NoiseSpec, SparseCoefficients, gen_iid_design, make_example_beta,
                    noise_sd, normalize_columns_sqrt_n, snr, standard_normals, table2_beta)
from .sign_oracle import KktSystem

CSV_HEADER = ("design", "arm", "grid_value", "beta_min", "beta_max", "l2_beta", "snr",
              "trials", "successes", "prob", "wilson_lo", "wilson_hi")
ARMS = (NoiseKind.POISSON_LIKE.value, NoiseKind.HOMOSCEDASTIC_MATCHED.value)
IC_VIOLATION_ID = 3
SUFFICIENCY_ID = 4
CROSS_CHECK_ID = 5

_Z95 = NormalDist().inv_cdf(0.975)


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 400
    p: int = 1000
    q: int = 20
    sigma2: float = 1.0
    master_seed: int = 20240101
    trials: int = 500
    design_fixed_seed: int = 7
    beta_min: float = 5.0
    beta_max_grid: tuple = (100.0, 90.0, 80.0, 70.0, 60.0, 50.0, 40.0, 30.0, 20.0, 10.0)
    snr_grid: tuple | None = None       # None: the design-1 SNR values
    common_beta_max: float = 40.0       # fixes ||beta*||_2 for design 2
    arms: tuple = ARMS
    ic_zeta: float = 0.05
    out_dir: str = "results"
    workers: int = 1

    def __post_init__(self):
        for name in ("beta_max_grid", "snr_grid", "arms"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(v))
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not (0 < self.q < self.p) or self.q % 2:
            raise ValueError("q must be even with 0 < q < p")
        if self.n < 1 or not self.sigma2 > 0:
            raise ValueError("need n >= 1 and sigma2 > 0")
        if not self.beta_max_grid or (self.snr_grid is not None and not self.snr_grid):
            raise ValueError("grids must be non-empty")
        for arm in self.arms:
            if arm not in ARMS:
                raise ValueError(f"unknown arm {arm!r}; choose from {ARMS}")
        if self.ic_zeta < 0 or self.workers < 1:
            raise ValueError("need ic_zeta >= 0 and workers >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown config fields: {', '.join(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ValueError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(self).items()}

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)


@dataclass(frozen=True)
class TableRow:
    grid_value: float
    beta_max: float
    beta_min: float
    l2_beta: float
    snr: float

    def beta(self, config: ExperimentConfig) -> SparseCoefficients:
        return make_example_beta(config.p, config.q, self.beta_max, self.beta_min)


def round_half_up(x: float, digits: int = 0) -> float:
    """Conventional rounding for display (2.5 -> 3), unlike Python's banker's rounding."""
    s = 10.0**digits
    return math.floor(x * s + 0.5) / s


def build_table1(config: ExperimentConfig) -> list[TableRow]:
    """Fixed beta_min, varying beta_max."""
    rows = []
    for bmax in config.beta_max_grid:
        b = make_example_beta(config.p, config.q, bmax, config.beta_min)
        rows.append(TableRow(float(bmax), float(bmax), config.beta_min, b.l2, snr(b, config.n, config.sigma2)))
    return rows


def common_l2(config: ExperimentConfig) -> float:
    return make_example_beta(config.p, config.q, config.common_beta_max, config.beta_min).l2


def design2_snr_grid(config: ExperimentConfig) -> tuple:
    if config.snr_grid is not None:
        return config.snr_grid
    return tuple(r.snr for r in build_table1(config))


def build_table2(config: ExperimentConfig) -> list[TableRow]:
    """Fixed ||beta*||_2, varying beta_min so that SNR hits each target."""
    l2 = common_l2(config)
    rows = []
    for target in design2_snr_grid(config):
        b = table2_beta(config.p, config.q, config.n, target, config.sigma2, l2)
        bmax = float(np.max(b.beta))
        rows.append(TableRow(float(target), bmax, b.min_abs, b.l2, snr(b, config.n, config.sigma2)))
    return rows


def table_rows(config: ExperimentConfig, design: int) -> list[TableRow]:
    if design == 1:
        return build_table1(config)
    if design == 2:
        return build_table2(config)
    raise ValueError(f"design must be 1 or 2, got {design}")


def format_table(rows: Sequence[TableRow], design: int) -> str:
    """Plain-text table rounded for display (integers, beta_min to one decimal)."""
    def line(label, vals):
        return f"{label:<10}" + "".join(f"{v:>7}" for v in vals)
    if design == 1:
        return "\n".join([
            line("beta_max", [f"{round_half_up(r.beta_max):.0f}" for r in rows]),
            line("||beta||", [f"{round_half_up(r.l2_beta):.0f}" for r in rows]),
            line("SNR", [f"{round_half_up(r.snr):.0f}" for r in rows]),
        ])
    return "\n".join([
        line("beta_min", [f"{round_half_up(r.beta_min, 1):.1f}" for r in rows]),
        line("beta_max", [f"{round_half_up(r.beta_max):.0f}" for r in rows]),
        line("SNR", [f"{round_half_up(r.snr):.0f}" for r in rows]),
    ])


# ---------------------------------------------------------------- Monte Carlo

def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError("need 0 <= successes <= trials and trials >= 1")
    phat = successes / trials
    z2 = z * z
    denom = 1 + z2 / trials
    centre = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials)) / denom
    # the ends are exactly 0 and 1 at the extremes; the subtraction leaves rounding noise
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class ResultRow:
    design: int
    arm: str
    grid_value: float
    beta_min: float
    beta_max: float
    l2_beta: float
    snr: float
    trials: int
    successes: int
    prob: float
    wilson_lo: float
    wilson_hi: float
    singular: bool = False


@dataclass
class ExperimentResult:
    rows: list[ResultRow]
    meta: dict = field(default_factory=dict)

    def probs(self) -> np.ndarray:
        return np.array([r.prob for r in self.rows])


def make_row(design, arm, grid_value, beta: SparseCoefficients, n, sigma2, successes, trials,
             singular=False) -> ResultRow:
    lo, hi = wilson_interval(successes, trials)
    return ResultRow(
        design=design, arm=arm, grid_value=float(grid_value),
        beta_min=beta.min_abs, beta_max=float(np.max(np.abs(beta.beta))), l2_beta=beta.l2,
        snr=snr(beta, n, sigma2), trials=trials, successes=successes,
        prob=successes / trials, wilson_lo=lo, wilson_hi=hi, singular=singular,
    )


def fixed_design(config: ExperimentConfig) -> np.ndarray:
    return gen_iid_design(config.n, config.p, config.design_fixed_seed)


def trial_normals(n: int, seed_prefix: tuple, trials: int) -> np.ndarray:
    """n x trials matrix whose column t is seeded by seed_prefix + (t,)."""
    z = np.empty((n, trials))
    for t in range(trials):
        z[:, t] = standard_normals(n, (*seed_prefix, t))
    return z


def count_successes(x, beta: SparseCoefficients, noise: NoiseSpec, seed_prefix: tuple,
                    trials: int) -> tuple[int, bool]:
    """(successes, singular). A singular X(S)^T X(S) makes every trial a failure."""
    try:
        system = KktSystem(x, beta)
    except SingularGram:
        return 0, True
    eps = noise_sd(x, beta, noise)[:, None] * trial_normals(x.shape[0], seed_prefix, trials)
    return int(np.count_nonzero(system.successes(eps))), False


_WORKER_X: dict = {}


def _point_task(args):
    config, design, arm, k, row = args
    key = (config.n, config.p, config.design_fixed_seed)
    if key not in _WORKER_X:
        _WORKER_X.clear()
        _WORKER_X[key] = fixed_design(config)
    x = _WORKER_X[key]
    beta = row.beta(config)
    noise = NoiseSpec(NoiseKind(arm), config.sigma2)
    succ, singular = count_successes(x, beta, noise, (config.master_seed, design, k), config.trials)
    return make_row(design, arm, row.grid_value, beta, config.n, config.sigma2, succ, config.trials, singular)


def _map(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [_point_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_point_task, tasks))


def run_success_curve(config: ExperimentConfig, arm: str = ARMS[0], design: int = 1) -> ExperimentResult:
    if arm not in ARMS:
        raise ValueError(f"unknown arm {arm!r}")
    rows = table_rows(config, design)
    tasks = [(config, design, arm, k, r) for k, r in enumerate(rows)]
    return ExperimentResult(_map(tasks, config.workers), meta={"design": design, "arm": arm})


def run_curves(config: ExperimentConfig, arms: Sequence[str] | None = None,
               designs: Sequence[int] = (1, 2)) -> ExperimentResult:
    """Several (design, arm) curves in one result, rows ordered by (design, arm, point)."""
    arms = config.arms if arms is None else tuple(arms)
    tasks = []
    for design in designs:
        rows = table_rows(config, design)
        for arm in arms:
            tasks += [(config, design, arm, k, r) for k, r in enumerate(rows)]
    return ExperimentResult(_map(tasks, config.workers), meta={"designs": list(designs), "arms": list(arms)})


def curve(result: ExperimentResult, design: int, arm: str) -> list[ResultRow]:
    return sorted((r for r in result.rows if r.design == design and r.arm == arm), key=lambda r: r.snr)


# ----------------------------------------------------------- IC violation

def ic_violating_design(x, beta: SparseCoefficients, zeta: float, column: int | None = None,
                        seed=0) -> tuple[np.ndarray, int]:
    """Copy of ``x`` with one off-support column replaced so that d_j = 1 + zeta exactly.

    With w = X(S) (X(S)^T X(S))^{-1} b the new column is
    (1 + zeta) w / (w^T w) + u, where u is orthogonal to the span of X(S) and
    scaled so the column has norm sqrt(n).
    """
    x = np.array(x, dtype=np.float64)
    n = x.shape[0]
    j = int(beta.complement[0]) if column is None else int(column)
    if j in set(beta.support.tolist()):
        raise ValueError("the replaced column must lie outside the support")
    xs = x[:, beta.support]
    gram = xs.T @ xs
    w = xs @ linalg.solve_spd(gram, beta.sign_vector)
    ww = float(w @ w)
    base = (1 + zeta) / ww * w
    z = standard_normals(n, (seed, IC_VIOLATION_ID, 1))
    u = z - xs @ linalg.solve_spd(gram, xs.T @ z)
    room = n - float(base @ base)
    if room <= 0:
        raise ValueError("zeta too large for a column of norm sqrt(n)")
    x[:, j] = base + math.sqrt(room) * u / math.sqrt(float(u @ u))
    return x, j


def run_ic_violation(config: ExperimentConfig, arm: str = ARMS[0]) -> ExperimentResult:
    """Success frequency on a design whose irrepresentable quantity is 1 + zeta."""
    beta = make_example_beta(config.p, config.q, config.common_beta_max, config.beta_min)
    x, j = ic_violating_design(fixed_design(config), beta, config.ic_zeta, seed=config.master_seed)
    lhs = conditions.irrepresentable_lhs(x, beta.support, beta.sign_vector)
    succ, singular = count_successes(x, beta, NoiseSpec(NoiseKind(arm), config.sigma2),
                                     (config.master_seed, IC_VIOLATION_ID, 0), config.trials)
    row = make_row(IC_VIOLATION_ID, arm, config.ic_zeta, beta, config.n, config.sigma2, succ,
                   config.trials, singular)
    return ExperimentResult([row], meta={"ic_lhs": lhs, "column": j, "zeta": config.ic_zeta,
                                         "ceiling": bounds.ic_violation_ceiling()})


# ------------------------------------------------ numerical cross-check arm

@dataclass(frozen=True)
class CrossCheck:
    oracle: np.ndarray        # success per trial, interval oracle
    grid: np.ndarray          # success per trial, lambda-grid solver
    interval_width: np.ndarray
    grid_ratio: float         # spacing of the log grid, as a ratio between neighbours

    @property
    def disagreements(self) -> np.ndarray:
        return np.flatnonzero(self.oracle != self.grid)


def grid_recovery_successes(x, y_cols, beta: SparseCoefficients, num: int = 2000,
                            tol: float = 1e-9) -> np.ndarray:
    out = np.zeros(y_cols.shape[1], dtype=bool)
    for t in range(y_cols.shape[1]):
        y = y_cols[:, t]
        grid = solver.recovery_grid(x, y, num=num)
        res = solver.grid_sign_recovery(x, y, beta.beta, grid=grid, tol=tol, max_active=x.shape[0] // 2)
        out[t] = res.success
    return out


def cross_check(x, beta: SparseCoefficients, noise: NoiseSpec, seed_prefix: tuple, trials: int,
                num: int = 2000) -> CrossCheck:
    """Interval oracle vs a dense warm-started lambda grid on the same noise draws."""
    system = KktSystem(x, beta)
    eps = noise_sd(x, beta, noise)[:, None] * trial_normals(x.shape[0], seed_prefix, trials)
    low, high = system.intervals(eps)
    y = (x @ beta.beta)[:, None] + eps
    return CrossCheck(
        oracle=np.asarray(low < high),
        grid=grid_recovery_successes(x, y, beta, num=num),
        interval_width=np.maximum(high - low, 0.0),
        grid_ratio=(1e3 / 1e-6) ** (1 / (num - 1)),
    )


@dataclass(frozen=True)
class EquivalenceCase:
    index: int
    kind: str
    oracle: bool
    grid: bool
    low: float
    high: float
    explained: bool         # disagreement attributable to grid resolution or tolerance


@dataclass(frozen=True)
class EquivalenceResult:
    cases: list[EquivalenceCase]

    @property
    def agreement(self) -> float:
        return sum(c.oracle == c.grid for c in self.cases) / len(self.cases)

    @property
    def disagreements(self) -> list[EquivalenceCase]:
        return [c for c in self.cases if c.oracle != c.grid]


def random_small_instance(seed: tuple, kind: str, sigma2: float = 0.5):
    """n <= 20, p <= 8, q <= 3 with Gaussian design; returns (x, beta, y, eps)."""
    u = np.random.default_rng(np.random.SeedSequence(list(seed)))
    q = int(u.integers(1, 4))
    p = int(u.integers(q + 1, 9))
    n = int(u.integers(max(q + 2, 6), 21))
    x = u.standard_normal((n, p))
    beta = np.zeros(p)
    support = u.choice(p, q, replace=False)
    beta[support] = u.choice([-1.0, 1.0], q) * u.uniform(0.3, 2.0, q)
    b = SparseCoefficients.from_beta(beta)
    eps = noise_sd(x, b, NoiseSpec(NoiseKind(kind), sigma2)) * standard_normals(n, (*seed, 1))
    return x, b, x @ beta + eps, eps


def _grid_hits(grid, low, high, rel):
    return np.any((grid > low * (1 + rel)) & (grid < high * (1 - rel)))


def oracle_equivalence(instances: int = 200, num: int = 2000, seed: int = 0,
                       kinds: Sequence[str] = ARMS, rel: float = 1e-6) -> EquivalenceResult:
    """Interval oracle vs the lambda-grid solver on random small instances.

    A disagreement is explained when the oracle succeeds but no grid point
    lies inside the feasible interval, or when the grid succeeds and the
    oracle's interval is empty by less than ``rel`` relative (a tolerance tie).
    """
    cases = []
    for k in range(instances):
        kind = kinds[k % len(kinds)]
        x, b, y, eps = random_small_instance((seed, CROSS_CHECK_ID, k), kind)
        low, high = KktSystem(x, b).intervals(eps)
        grid = solver.recovery_grid(x, y, num=num)
        ok_grid = solver.grid_sign_recovery(x, y, b.beta, grid=grid, tol=1e-12).success
        ok = bool(low < high)
        if ok == ok_grid:
            explained = True
        elif ok:
            explained = not _grid_hits(grid, low, high, rel)
        else:
            explained = bool(high >= low * (1 - rel))
        cases.append(EquivalenceCase(k, kind, ok, ok_grid, float(low), float(high), explained))
    return EquivalenceResult(cases)


# ----------------------------------------------------- sufficiency sweep

@dataclass(frozen=True)
class SufficiencyResult:
    instances: int
    successes: int                  # lambda from the recommended choice lies in the interval
    events_held: int                # M(U) and M(V) both held
    certificate_failures: int       # events held but the constructed estimate failed a check
    max_kkt: float
    bounds_raw: np.ndarray          # Theorem-1 style bound per instance

    @property
    def frequency(self) -> float:
        return self.successes / self.instances


def random_instance(n: int, p: int, q: int, seed: tuple, max_tries: int = 100):
    """Column-normalised Gaussian design and random-sign beta* satisfying IC with eta > 0."""
    for attempt in range(max_tries):
        x = normalize_columns_sqrt_n(standard_normals((n, p), (*seed, attempt, 0)))
        u = standard_normals(2 * q, (*seed, attempt, 1))
        beta = np.zeros(p)
        beta[:q] = np.where(u[:q] > 0, 1.0, -1.0) * (1.0 + np.abs(u[q:]))
        b = SparseCoefficients.from_beta(beta)
        if conditions.irrepresentable_lhs(x, b.support, b.sign_vector) < 1:
            return x, b
    raise RuntimeError("no design satisfying the irrepresentable condition found")


def run_sufficiency_check(instances: int = 100, n: int = 200, p: int = 20, q: int = 3,
                          sigma2: float = 0.02, seed: int = 0, kkt_tol: float = 1e-8) -> SufficiencyResult:
    """Check the recommended lambda on random instances satisfying the fixed-design hypotheses.

    For each instance one Poisson-like noise vector is drawn. Whenever the
    events M(U) and M(V) hold, the closed-form candidate (beta*(S) + g - lambda h, 0)
    must carry the true signs and satisfy the Lasso KKT conditions.
    """
    succ = held = bad = 0
    max_kkt = 0.0
    raws = np.empty(instances)
    for k in range(instances):
        x, beta = random_instance(n, p, q, (seed, SUFFICIENCY_ID, k))
        inp = bounds.FixedDesignBoundInputs.from_data(x, beta, sigma2)
        lam = bounds.corollary1_lambda(inp)
        raws[k] = bounds.thm1_probability(inp, lam).raw
        eps = noise_sd(x, beta, NoiseSpec(NoiseKind.POISSON_LIKE, sigma2)) * standard_normals(n, (seed, SUFFICIENCY_ID, k, 9))
        system = KktSystem(x, beta)
        low, high = system.intervals(eps)
        succ += int(low < lam < high)
        u, v = system.u(eps, lam), system.v(eps, lam)
        if np.max(np.abs(u)) < beta.min_abs and np.max(np.abs(v)) < lam:
            held += 1
            y = x @ beta.beta + eps
            est = system.r3_estimate(eps, lam)
            viol = solver.kkt_violation(x, y, est, lam)
            max_kkt = max(max_kkt, viol)
            if not (np.array_equal(np.sign(est), np.sign(beta.beta)) and viol <= kkt_tol):
                bad += 1
    return SufficiencyResult(instances, succ, held, bad, max_kkt, raws)


# ---------------------------------------------------------------- output

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def emit_csv(result: ExperimentResult | Sequence[ResultRow], path) -> Path:
    rows = result.rows if isinstance(result, ExperimentResult) else list(result)
    if not rows:
        raise ValueError("no rows to write")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in rows:
                w.writerow([_fmt(getattr(r, c)) if c != "arm" else r.arm for c in CSV_HEADER])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        out = []
        for d in reader:
            out.append(ResultRow(
                design=int(d["design"]), arm=d["arm"], grid_value=float(d["grid_value"]),
                beta_min=float(d["beta_min"]), beta_max=float(d["beta_max"]), l2_beta=float(d["l2_beta"]),
                snr=float(d["snr"]), trials=int(d["trials"]), successes=int(d["successes"]),
                prob=float(d["prob"]), wilson_lo=float(d["wilson_lo"]), wilson_hi=float(d["wilson_hi"]),
            ))
        return out


_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def emit_svg_chart(results, path, title: str = "Probability of success vs SNR") -> Path:
    """Line chart, linear SNR axis, one polyline per (design, arm)."""
    if isinstance(results, ExperimentResult):
        results = [results]
    rows = [r for res in results for r in (res.rows if isinstance(res, ExperimentResult) else res)]
    if not rows:
        raise ValueError("no rows to plot")
    w, h, left, right, top, bottom = 640, 420, 60, 190, 40, 50
    pw, ph = w - left - right, h - top - bottom
    xmin, xmax = min(r.snr for r in rows), max(r.snr for r in rows)
    if xmax == xmin:
        xmin, xmax = xmin - 1, xmax + 1

    def sx(v):
        return left + (v - xmin) / (xmax - xmin) * pw

    def sy(v):
        return top + (1 - v) * ph

    keys = sorted({(r.design, r.arm) for r in rows})
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
        f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for v in np.linspace(0, 1, 6):
        out.append(f'<text x="{left - 6}" y="{sy(v) + 4:.1f}" text-anchor="end" font-size="11">{v:.1f}</text>')
        out.append(f'<line x1="{left}" y1="{sy(v):.1f}" x2="{left + pw}" y2="{sy(v):.1f}" stroke="#ddd"/>')
    for v in np.linspace(xmin, xmax, 6):
        out.append(f'<text x="{sx(v):.1f}" y="{top + ph + 16}" text-anchor="middle" font-size="11">{v:.0f}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{h - 10}" text-anchor="middle" font-size="12">SNR</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 16 {top + ph / 2:.1f})">P(success)</text>')
    for i, (design, arm) in enumerate(keys):
        pts = sorted((r.snr, r.prob) for r in rows if (r.design, r.arm) == (design, arm))
        colour = _COLOURS[i % len(_COLOURS)]
        dash = ' stroke-dasharray="6 4"' if design == 2 else ""
        coords = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in pts)
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="2"{dash} points="{coords}"/>')
        ly = top + 14 + 18 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 36}" y2="{ly}" '
                   f'stroke="{colour}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{left + pw + 40}" y="{ly + 4}" font-size="11">'
                   f'{escape(f"design {design}, {arm}")}</text>')
    out.append("</svg>")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(out) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def write_manifest(config: ExperimentConfig, path, extra: dict | None = None) -> Path:
    from . import __version__
    doc = {
        "version": __version__,
        "config": config.to_dict(),
        "seeds": {
            "master_seed": config.master_seed,
            "design_fixed_seed": config.design_fixed_seed,
            "trial_seed_layout": "(master_seed, experiment_id, grid_index, trial_index)",
            "experiment_ids": {"design1": 1, "design2": 2, "ic_violation": IC_VIOLATION_ID},
        },
    }
    if extra:
        doc.update(extra)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")

