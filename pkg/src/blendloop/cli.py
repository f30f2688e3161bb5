"""
Command line workflow: estimate -> chart -> simulate / compare -> tune.

Exit codes: 0 success, 2 bad input or flags, 3 degenerate data,
4 chart signals when ``--fail-on-signal`` is given.
"""
from __future__ import annotations

import argparse
import math
import os
import shutil
import sys
from pathlib import Path

import numpy as np

from . import csvio
from .charts import build_charts
from .errors import (
    BlendloopError,
    DegenerateSeriesError,
    InsufficientDataError,
    InvalidInputError,
)
from .process import Ar1Model, BlendProcess, FirstOrder, Integral, SensorModel
from .simulator import SimConfig, compare_rules, simulate_paths, summarize
from .timeseries import (
    ar1_residuals,
    correlogram,
    dickey_fuller,
    estimate_ar1,
    jarque_bera,
)
from .tuner import TuneSpec, grid_search

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE, EXIT_SIGNAL = 0, 2, 3, 4
SEED_ENV = "BLENDLOOP_SEED"
BOOL_KEYS = {"clamp", "exact_balance", "residuals_of_ar1", "fail_on_signal"}


class UsageError(InvalidInputError):
    pass


def parse_rule(text: str):
    """``integral`` or ``first-order:L1,L2``."""
    t = text.strip().lower()
    if t == "integral":
        return Integral()
    if t.startswith("first-order:"):
        try:
            l1, l2 = (float(p) for p in t.split(":", 1)[1].split(","))
        except ValueError:
            raise UsageError(f"cannot parse rule {text!r}; use first-order:L1,L2") from None
        return FirstOrder(l1, l2)
    raise UsageError(f"unknown rule {text!r}; use 'integral' or 'first-order:L1,L2'")


def _input_path(arg: str):
    if arg.startswith("@"):
        return csvio.fixture_path(arg[1:])
    p = Path(arg)
    if not p.is_file():
        raise UsageError(f"input file not found: {arg}")
    return p


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- subcommands -------------------------------------------------------------


def cmd_estimate(args) -> int:
    xs = csvio.read_series_csv(_input_path(args.input), args.column)
    fit = estimate_ar1(xs)
    resid = ar1_residuals(xs, fit)
    print(f"observations used : {fit.n_used}")
    print(f"phi_hat           : {fit.phi_hat:.6f}  (se {fit.se_phi:.6f}, t {fit.t_phi:.4f})")
    print(f"intercept_hat     : {fit.intercept_hat:.6f}  (se {fit.se_intercept:.6f})")
    print(f"mu_hat            : {fit.mu_hat:.6f}")
    print(f"sigma_v_hat       : {fit.sigma_v_hat:.6f}")
    if xs.size >= 10:
        df = dickey_fuller(xs)
        verdict = "reject unit root" if df.reject_unit_root else "cannot reject unit root"
        print(f"Dickey-Fuller t   : {df.t_stat:.4f}  (5% crit {df.critical_5pct:.3f}; {verdict})")
    max_lag = min(args.lags, (xs.size - 1) // 2)
    if max_lag >= 1:
        r, p, band = correlogram(xs, max_lag)
        print(f"correlogram (band +/-{band:.3f})")
        for lag in range(1, max_lag + 1):
            print(f"  lag {lag:2d}  acf {r[lag]: .4f}  pacf {p[lag]: .4f}")
    if resid.size >= 8:
        try:
            jb = jarque_bera(resid)
            print(f"Jarque-Bera (resid): {jb.jb_stat:.4f}  p={jb.p_value:.4f}  "
                  f"skew {jb.skewness:.4f}  kurt {jb.kurtosis:.4f}")
        except DegenerateSeriesError:
            print("Jarque-Bera (resid): undefined, residuals are constant")
    path = _out_dir(args) / "residuals.csv"
    csvio.write_series_csv(path, resid, first_index=2)
    print(f"residuals written to {path}")
    return EXIT_OK


def _report_chart(name, chart) -> None:
    labels = [chart.first_index + k for k in chart.signals]
    print(f"{name}: center {chart.center:.6g}  lcl {chart.lcl:.6g}  ucl {chart.ucl:.6g}  "
          f"signals {len(labels)} {labels}")


def cmd_chart(args) -> int:
    xs = csvio.read_series_csv(_input_path(args.input), args.column)
    first = 1
    if args.residuals_of_ar1:
        xs = ar1_residuals(xs, estimate_ar1(xs))
        first = 2
    ind, mr = build_charts(xs, first_index=first)
    if mr.degenerate:
        print("warning: series is constant, control limits are degenerate", file=sys.stderr)
    out = _out_dir(args)
    csvio.write_chart_csv(out / "individuals.csv", ind)
    csvio.write_chart_csv(out / "mr.csv", mr)
    _report_chart("individuals", ind)
    _report_chart("moving range", mr)
    n_signals = len(ind.signals) + len(mr.signals)
    print(f"total signals: {n_signals}")
    if args.fail_on_signal and n_signals:
        return EXIT_SIGNAL
    return EXIT_OK


def _sim_config(args, rule, horizon=None) -> SimConfig:
    sigma_v = math.sqrt(args.var_v) if args.var_v is not None else args.sigma_v
    sigma_eps = math.sqrt(args.var_eps) if args.var_eps is not None else args.sigma_eps
    if sigma_v is None or sigma_eps is None or (args.var_v is not None and args.var_v < 0) \
            or (args.var_eps is not None and args.var_eps < 0):
        raise UsageError("noise variances must be >= 0")
    return SimConfig(
        process=BlendProcess(args.flow_rate, args.u0, args.tau, args.exact_balance),
        disturbance=Ar1Model(args.mu, args.phi, sigma_v),
        sensor=SensorModel(sigma_eps),
        rule=rule,
        horizon=args.horizon if horizon is None else horizon,
        clamp_u=args.clamp,
    )


def _simulate_rule(args):
    if args.rule == "integral":
        if args.lambda1 is not None or args.lambda2 is not None:
            raise UsageError("--lambda1/--lambda2 only apply to --rule first-order")
        return Integral()
    l1 = 0.5 if args.lambda1 is None else args.lambda1
    l2 = 0.5 if args.lambda2 is None else args.lambda2
    return FirstOrder(l1, l2)


def cmd_simulate(args) -> int:
    rule = _simulate_rule(args)
    cfg = _sim_config(args, rule)
    paths = simulate_paths(cfg, args.reps, args.seed)
    tau = cfg.process.tau
    summary = summarize(paths.z, tau)
    trace = paths.trace(0)
    out = _out_dir(args)
    csvio.write_trace_csv(out / "trace.csv", trace)
    csvio.write_summary_csv(out / "summary.csv", [csvio.summary_row(rule.label(), summary, tau)])
    csvio.write_per_step_csv(out / "per_step.csv", summary.per_step_mean_z)
    # monitoring chart on the deviation from target of the first replication
    ind, mr = build_charts(trace.z - tau, first_index=1)
    csvio.write_chart_csv(out / "monitor_individuals.csv", ind)
    csvio.write_chart_csv(out / "monitor_mr.csv", mr)
    print(f"rule {rule.label()}  reps {summary.n_reps}  horizon {summary.horizon}  "
          f"mean_z {summary.mean_z:.4f}  var_z {summary.var_z:.4f}  "
          f"|mean_z - tau| {abs(summary.mean_z - tau):.4f}")
    if trace.clamp_events:
        print(f"feed clamped at 0 on {len(trace.clamp_events)} steps of replication 1")
    _report_chart("monitor individuals (z - tau)", ind)
    _report_chart("monitor moving range", mr)
    return EXIT_OK


def cmd_compare(args) -> int:
    rules = [parse_rule(r) for r in args.rules]
    if len(rules) < 2:
        raise UsageError("compare needs at least two rules")
    cfg = _sim_config(args, rules[0])
    rows = compare_rules(cfg, rules, args.reps, args.seed)
    tau = cfg.process.tau
    table = [csvio.summary_row(r.rule.label(), r.summary, tau) for r in rows]
    print(f"{'rule':<24}{'mean_z':>10}{'var_z':>10}{'abs_offset':>12}")
    for label, _, _, m, v, off in table:
        print(f"{label:<24}{m:>10.4f}{v:>10.4f}{off:>12.4f}")
    path = _out_dir(args) / "comparison.csv"
    csvio.write_summary_csv(path, table)
    return EXIT_OK


def cmd_tune(args) -> int:
    spec = TuneSpec(
        lambda1_grid=(args.lambda1_min, args.lambda1_max, args.lambda1_step),
        lambda2_grid=(args.lambda2_min, args.lambda2_max, args.lambda2_step),
        objective=args.objective.replace("-", "_"),
        n_reps=args.reps,
        base_seed=args.seed,
    )
    cfg = _sim_config(args, Integral())
    res = grid_search(cfg, spec)
    path = _out_dir(args) / "surface.csv"
    csvio.write_surface_csv(path, res.surface)
    print(f"best lambda1 {res.best[0]:g}  lambda2 {res.best[1]:g}  "
          f"{spec.objective} {res.best_objective:.6f}")
    try:
        print(f"at (1, 1), the integral rule: {res.objective_at(1.0, 1.0):.6f}")
    except KeyError:
        pass
    print(f"surface ({len(res.surface)} points) written to {path}")
    return EXIT_OK


def cmd_fixtures(args) -> int:
    if args.action == "list":
        for name, desc in csvio.FIXTURES.items():
            print(f"{name}\t{desc}")
        return EXIT_OK
    if not args.name:
        raise UsageError("fixtures export needs a fixture name")
    src = csvio.fixture_path(args.name)
    dest = Path(args.out or f"{args.name}.csv")
    dest.parent.mkdir(parents=True, exist_ok=True)
    with src.open("rb") as fh, open(dest, "wb") as out:
        shutil.copyfileobj(fh, out)
    print(f"wrote {dest}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def _env_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return v


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _add_sim_flags(p, horizon: int, reps: int) -> None:
    g = p.add_argument_group("process and noise")
    g.add_argument("--mu", type=float, default=10.0, help="mean raw protein level")
    g.add_argument("--phi", type=float, default=0.7, help="AR(1) coefficient, 0 <= phi < 1")
    sv = g.add_mutually_exclusive_group()
    sv.add_argument("--sigma-v", type=float, default=math.sqrt(0.5),
                    help="innovation standard deviation (default sqrt(0.5))")
    sv.add_argument("--var-v", type=float, help="innovation variance (alternative to --sigma-v)")
    se = g.add_mutually_exclusive_group()
    se.add_argument("--sigma-eps", type=float, default=math.sqrt(0.5),
                    help="measurement error standard deviation (default sqrt(0.5))")
    se.add_argument("--var-eps", type=float, help="measurement error variance")
    g.add_argument("--u0", type=float, default=6.0, help="initial gluten feed (g/s)")
    g.add_argument("--tau", type=float, default=16.0, help="target output level")
    g.add_argument("--flow-rate", type=float, default=100.0, help="raw flour rate D (g/s)")
    g.add_argument("--exact-balance", action="store_true", help="use the exact mass balance")
    g.add_argument("--clamp", action="store_true", help="clamp negative feed rates at 0")
    g.add_argument("--horizon", type=_pos_int, default=horizon)
    g.add_argument("--reps", type=_pos_int, default=reps)
    g.add_argument("--seed", type=_nonneg_int, default=None,
                   help=f"base seed (default: ${SEED_ENV} or 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blendloop", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--config", help="plain-text 'key = value' file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="fit an AR(1) and write its residuals")
    p.add_argument("input", help="series CSV, or @table1 for the bundled fixture")
    p.add_argument("--column", default="value")
    p.add_argument("--lags", type=_pos_int, default=5, help="correlogram lags to print")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("chart", help="individuals and moving-range charts")
    p.add_argument("input", help="series CSV, or @table1 for the bundled fixture")
    p.add_argument("--column", default="value")
    p.add_argument("--residuals-of-ar1", action="store_true", help="chart AR(1) residuals")
    p.add_argument("--fail-on-signal", action="store_true", help="exit 4 if any point signals")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_chart)

    p = sub.add_parser("simulate", help="simulate one control rule")
    p.add_argument("--rule", choices=["integral", "first-order"], default="integral")
    p.add_argument("--lambda1", type=float)
    p.add_argument("--lambda2", type=float)
    _add_sim_flags(p, horizon=50, reps=30)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="compare rules on common random numbers")
    p.add_argument("--rules", nargs="+", default=["integral", "first-order:0.5,0.5"],
                   help="rules as 'integral' or 'first-order:L1,L2'")
    _add_sim_flags(p, horizon=50, reps=30)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("tune", help="grid search over lambda1, lambda2")
    for name in ("lambda1", "lambda2"):
        p.add_argument(f"--{name}-min", type=float, default=0.0)
        p.add_argument(f"--{name}-max", type=float, default=1.0)
        p.add_argument(f"--{name}-step", type=float, default=0.1)
    p.add_argument("--objective", choices=["mse", "variance", "abs-offset"], default="mse")
    _add_sim_flags(p, horizon=500, reps=20)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("fixtures", help="list or export bundled data")
    p.add_argument("action", choices=["list", "export"])
    p.add_argument("name", nargs="?")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fixtures)
    return parser


def read_config(path) -> dict[str, str]:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def _apply_config(parser, argv, config: dict[str, str]) -> argparse.Namespace:
    """Re-parse ``argv`` with config values installed as subcommand defaults."""
    args = parser.parse_args(argv)
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    subparser = sub.choices[args.command]
    known = {a.dest for a in subparser._actions}
    given = {tok.split("=", 1)[0] for tok in argv if tok.startswith("--")}
    config = dict(config)
    for flag, partner in (("--sigma-v", "var_v"), ("--var-v", "sigma_v"),
                          ("--sigma-eps", "var_eps"), ("--var-eps", "sigma_eps")):
        if flag in given:
            config.pop(partner, None)
    defaults = {}
    for key, value in config.items():
        if key not in known:
            raise UsageError(f"config key {key!r} is not an option of '{args.command}'")
        if key in BOOL_KEYS:
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"config key {key!r} expects a boolean, got {value!r}")
            defaults[key] = value.lower() in ("true", "1", "yes")
        else:
            defaults[key] = value  # argparse applies the option's type to string defaults
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            args = _apply_config(parser, argv, read_config(args.config))
        if getattr(args, "seed", 0) is None:
            args.seed = _env_seed()
        np.seterr(over="ignore", invalid="ignore")
        return args.func(args)
    except SystemExit as exc:  # argparse usage errors exit with 2
        return int(exc.code or 0)
    except (InsufficientDataError, DegenerateSeriesError) as exc:
        print(f"error: degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (BlendloopError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
