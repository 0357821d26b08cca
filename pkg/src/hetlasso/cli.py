"""Command-line entry point: ``hetlasso <command> [options]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import bounds, concentration, conditions, experiments as ex, solver
from .errors import HetLassoError
from .model import NoiseKind, NoiseSpec, SparseCoefficients, make_dataset
from .sign_oracle import feasible_lambda_interval

log = logging.getLogger("hetlasso")


# ------------------------------------------------------------ dataset files

def write_dataset(ds, out: Path) -> Path:
    """Dataset directory: data.csv (y, epsilon, x_1..x_p), beta.csv, meta.json."""
    out.mkdir(parents=True, exist_ok=True)
    p = ds.x.shape[1]
    header = ",".join(["y", "epsilon"] + [f"x{j + 1}" for j in range(p)])
    table = np.column_stack([ds.y, ds.epsilon, ds.x])
    np.savetxt(out / "data.csv", table, delimiter=",", header=header, comments="", fmt="%.17g")
    np.savetxt(out / "beta.csv", ds.beta_star.beta, header="beta", comments="", fmt="%.17g")
    meta = {"noise_kind": ds.noise.kind.value, "sigma2": ds.noise.sigma2, "seed": list(ds.seed_record)}
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return out


def read_dataset(path: Path):
    path = Path(path)
    try:
        table = np.loadtxt(path / "data.csv", delimiter=",", skiprows=1, ndmin=2)
        beta = np.loadtxt(path / "beta.csv", skiprows=1, ndmin=1)
        meta = json.loads((path / "meta.json").read_text())
    except OSError as exc:
        raise OSError(f"cannot read dataset at {path}: {exc}") from exc
    return table[:, 2:], SparseCoefficients.from_beta(beta), table[:, 0], table[:, 1], meta


# ---------------------------------------------------------------- commands

def _config(args) -> ex.ExperimentConfig:
    cfg = ex.ExperimentConfig.load(args.config) if args.config else ex.ExperimentConfig()
    over = {}
    if args.seed is not None:
        over["master_seed"] = args.seed
    if args.trials is not None:
        over["trials"] = args.trials
    if args.out is not None:
        over["out_dir"] = args.out
    return cfg.replace(**over) if over else cfg


def _dump(obj):
    print(json.dumps(obj, indent=2, default=ex._json_default))


def cmd_gen(args):
    cfg = _config(args)
    rows = ex.table_rows(cfg, args.design)
    if not 0 <= args.point < len(rows):
        raise ValueError(f"--point must be in [0, {len(rows) - 1}]")
    beta = rows[args.point].beta(cfg)
    x = ex.fixed_design(cfg)
    ds = make_dataset(x, beta, NoiseSpec(NoiseKind(args.arm), cfg.sigma2),
                      (cfg.master_seed, args.design, args.point, args.trial))
    out = write_dataset(ds, Path(cfg.out_dir) / "dataset")
    print(out)


def cmd_solve(args):
    x, beta, y, _, _ = read_dataset(args.data)
    sol = solver.coordinate_descent(x, y, args.lam)
    _dump({
        "lam": sol.lam, "iterations": sol.iterations, "objective": sol.objective,
        "kkt_violation": sol.kkt_violation, "converged": sol.converged,
        "nonzeros": np.flatnonzero(sol.beta_hat).tolist(),
        "beta_hat": sol.beta_hat.tolist(),
        "signs_match": bool(np.array_equal(np.sign(sol.beta_hat), np.sign(beta.beta))),
    })


def cmd_oracle(args):
    x, beta, y, _, _ = read_dataset(args.data)
    _dump(feasible_lambda_interval(x, y, beta).as_dict())


def cmd_check_ic(args):
    x, beta, _, _, _ = read_dataset(args.data)
    r = conditions.check_conditions(x, beta)
    _dump(r.__dict__)


def cmd_bounds(args):
    x, beta, _, _, meta = read_dataset(args.data)
    sigma2 = args.sigma2 if args.sigma2 is not None else meta["sigma2"]
    inp = bounds.FixedDesignBoundInputs.from_data(x, beta, sigma2)
    lam = args.lam if args.lam is not None else bounds.corollary1_lambda(inp)
    gamma = bounds.gamma_fixed(inp)
    nec = bounds.cn_necessary(x, beta, sigma2)
    _dump({
        "snr": inp.snr, "eta": inp.eta, "c_min": inp.c_min, "lam": lam,
        "psi": bounds.psi_fixed(inp, lam),
        "thm1_probability": bounds.thm1_probability(inp, lam).as_dict(),
        "gamma": gamma.gamma, "gamma_probability": gamma.probability.as_dict(),
        "c_n": nec.c_n, "necessary_ceiling": nec.ceiling,
    })


def _finish_curves(cfg, result, name, args):
    out = Path(cfg.out_dir)
    csv_path = ex.emit_csv(result, out / f"{name}.csv")
    svg_path = ex.emit_svg_chart(result, out / f"{name}.svg")
    ex.write_manifest(cfg, out / f"{name}_manifest.json", {"command": name})
    for r in result.rows:
        print(f"design {r.design} {r.arm:<22} snr {r.snr:8.2f}  p={r.prob:.3f} "
              f"[{r.wilson_lo:.3f}, {r.wilson_hi:.3f}]")
    print(f"wrote {csv_path} and {svg_path}")


def _designs(args):
    return (1, 2) if args.design is None else (args.design,)


def cmd_example1(args):
    cfg = _config(args)
    for d in _designs(args):
        print(f"design {d}\n{ex.format_table(ex.table_rows(cfg, d), d)}")
    t0 = time.perf_counter()
    res = ex.run_curves(cfg, arms=[args.arm], designs=_designs(args))
    log.info("example 1 finished in %.1f s", time.perf_counter() - t0)
    _finish_curves(cfg, res, "example1", args)


def cmd_example2(args):
    cfg = _config(args)
    arms = ex.ARMS if args.arm is None else (args.arm,)
    res = ex.run_curves(cfg, arms=arms, designs=_designs(args))
    _finish_curves(cfg, res, "example2", args)


def cmd_ic_violation(args):
    cfg = _config(args)
    res = ex.run_ic_violation(cfg, arm=args.arm)
    r = res.rows[0]
    ceiling = res.meta["ceiling"]
    slack = 3 * (ceiling * (1 - ceiling) / r.trials) ** 0.5
    print(f"irrepresentable quantity {res.meta['ic_lhs']:.6f} (column {res.meta['column']})")
    print(f"success {r.successes}/{r.trials} = {r.prob:.3f} [{r.wilson_lo:.3f}, {r.wilson_hi:.3f}]; "
          f"ceiling {ceiling} + 3 se = {ceiling + slack:.3f}")
    ex.emit_csv(res, Path(cfg.out_dir) / "ic_violation.csv")


def cmd_concentration(args):
    seed = 0 if args.seed is None else args.seed
    checks = [
        *[(f"gaussian max n=50 t={t}", lambda t=t: concentration.gaussian_max_check(
            50, t, args.trials or 100_000, seed)) for t in (2, 3, 4)],
        ("chi2 max n=20 q=3 t=30", lambda: concentration.chi2_max_check(20, 3, 30, args.trials or 100_000, seed)),
        ("wishart n=500 q=10", lambda: concentration.wishart_eigen_check(
            500, 10, np.eye(10), args.trials or 1000, seed)),
        ("row norm n=1000 q=5", lambda: concentration.row_norm_bound_check(
            1000, 5, 1.0, args.trials or 2000, seed)),
    ]
    failed = 0
    for name, fn in checks:
        r = fn()
        failed += not r.passed
        print(f"{'PASS' if r.passed else 'FAIL'}  {name:<26} empirical {r.empirical:.3g}  bound {r.bound:.3g}")
    return 1 if failed else 0


def cmd_plot(args):
    rows = [r for path in args.csv for r in ex.read_csv(path)]
    out = Path(args.out or "chart.svg")
    if out.suffix != ".svg":
        out = out / "chart.svg"
    print(ex.emit_svg_chart([rows], out))


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hetlasso", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, arm_default=ex.ARMS[0], design=True):
        sp.add_argument("--config", help="JSON experiment config")
        sp.add_argument("--seed", type=int, help="master seed (overrides config)")
        sp.add_argument("--trials", type=int, help="trials per point (overrides config)")
        sp.add_argument("--out", help="output directory (overrides config)")
        sp.add_argument("--arm", choices=ex.ARMS, default=arm_default)
        if design:
            sp.add_argument("--design", type=int, choices=(1, 2))

    sp = sub.add_parser("gen", help="write one simulated dataset")
    common(sp)
    sp.set_defaults(design=1)
    sp.add_argument("--point", type=int, default=0, help="grid index within the design")
    sp.add_argument("--trial", type=int, default=0)
    sp.set_defaults(func=cmd_gen)

    for name, func, doc in (("solve", cmd_solve, "Lasso solve at one lambda"),
                            ("oracle", cmd_oracle, "feasible lambda interval"),
                            ("check-ic", cmd_check_ic, "irrepresentable and eigenvalue conditions"),
                            ("bounds", cmd_bounds, "fixed-design bound report")):
        sp = sub.add_parser(name, help=doc)
        sp.add_argument("data", type=Path, help="dataset directory written by `gen`")
        if name in ("solve", "bounds"):
            sp.add_argument("--lam", type=float, required=name == "solve")
        if name == "bounds":
            sp.add_argument("--sigma2", type=float)
        sp.set_defaults(func=func)

    sp = sub.add_parser("example1", help="success curves, Poisson-like noise")
    common(sp)
    sp.set_defaults(func=cmd_example1)
    sp = sub.add_parser("example2", help="Poisson-like vs matched homoscedastic curves")
    common(sp, arm_default=None)
    sp.set_defaults(func=cmd_example2)
    sp = sub.add_parser("ic-violation", help="success rate when the irrepresentable condition fails")
    common(sp, design=False)
    sp.set_defaults(func=cmd_ic_violation)
    sp = sub.add_parser("concentration", help="Monte Carlo checks of the tail bounds")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--trials", type=int)
    sp.set_defaults(func=cmd_concentration)
    sp = sub.add_parser("plot", help="SVG chart from result CSVs")
    sp.add_argument("csv", nargs="+")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        rc = args.func(args)
    except (HetLassoError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return int(rc or 0)


if __name__ == "__main__":
    sys.exit(main())
