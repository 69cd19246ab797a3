"""Command-line entry point.

Subcommands: ``simulate`` (synthetic regret experiments), ``backtest`` and
``sweep`` (historical replay), ``verify`` (oracle self-checks), ``bench``
(DP timing). A JSON config file is the source of truth for experiment
manifests; command-line flags override config values, and environment
variables prefixed ``VIRTUALBID_`` override defaults but not flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import date as Date
from pathlib import Path

import numpy as np

from . import backtest as bt
from . import verify as vf
from .benchmarks import SaConfig, SvmGrConfig, SaPolicy, SvmGrPolicy, UcbidGrPolicy
from .dpds import DpdsPolicy, GridSchedule
from .market_model import PriceBounds
from .models import UniformBernoulliModel, UniformSpreadModel
from .oracle import analytic_optimum
from .policies import ConstantPolicy, OraclePolicy, ZeroPolicy
from .simulator import (
    lower_bound_family,
    run_experiment,
    slope_check,
    write_trajectory_csv,
)

CONFIG_VERSION = 1
ENV_PREFIX = "VIRTUALBID_"

GRID_OVERRIDES = {"t-1": lambda t: t - 1}


def _load_config(path: str, parser: argparse.ArgumentParser) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {path}: {exc}")
    if cfg.get("version") != CONFIG_VERSION:
        parser.error(f"config {path} must declare \"version\": {CONFIG_VERSION}")
    return cfg


def _setting(args, cfg: dict, key: str, default=None, cast=None):
    """flag > environment > config file > default."""
    value = getattr(args, key.replace("-", "_"), None)
    if value is None:
        value = os.environ.get(ENV_PREFIX + key.replace("-", "_").upper())
    if value is None:
        value = cfg.get(key, default)
    if value is not None and cast is not None:
        value = cast(value)
    return value


def _policy_spec(args, cfg: dict, parser) -> dict:
    spec = cfg.get("policy", {})
    if isinstance(spec, str):
        spec = {"type": spec}
    if getattr(args, "policy", None):
        spec = dict(spec)
        spec["type"] = args.policy
    if "type" not in spec:
        parser.error("no policy given (config key \"policy\" or --policy)")
    return spec


def build_policy(spec: dict, num_options: int, budget: float, rho: float, model=None):
    kind = spec["type"]
    if kind == "dpds":
        override = spec.get("grid_override")
        if isinstance(override, str):
            override = GRID_OVERRIDES[override]
        schedule = GridSchedule(
            alpha=float(spec.get("alpha", 1.0)),
            gamma=float(spec.get("gamma", 0.5)),
            override=override,
        )
        return DpdsPolicy(num_options, budget, schedule=schedule, rho=float(spec.get("rho", rho)))
    if kind == "zero":
        return ZeroPolicy(num_options, budget)
    if kind == "ucbid-gr":
        return UcbidGrPolicy(num_options, budget)
    if kind == "sa":
        cfg = SaConfig(a=float(spec.get("a", 20000.0)), c=float(spec.get("c", 2000.0)))
        return SaPolicy(num_options, budget, cfg)
    if kind == "svm-gr":
        cfg = SvmGrConfig(
            lookback_days=int(spec.get("lookback_days", 6)),
            confidence=float(spec.get("confidence", 0.95)),
            training_span=int(spec.get("training_span", 365)),
        )
        return SvmGrPolicy(num_options, budget, cfg)
    if kind == "constant":
        return ConstantPolicy(num_options, budget, float(spec["bid"]))
    if kind == "oracle":
        if model is None:
            raise KeyError("oracle policy needs a synthetic model")
        return OraclePolicy(num_options, budget, analytic_optimum(model, budget, rho).bid)
    raise KeyError(f"unknown policy type {kind!r}")


def build_models(args, cfg: dict, parser, T: int) -> list[tuple[str, object]]:
    model_cfg = dict(cfg.get("model", {}))
    family = getattr(args, "model", None) or model_cfg.get("family")
    if family is None:
        parser.error("no model given (config key \"model\" or --model)")
    if family == "lower-bound":
        f1, f2, _eps = lower_bound_family(T)
        return [("f1", f1), ("f2", f2)]
    if family == "uniform-bernoulli":
        return [
            (
                "uniform-bernoulli",
                UniformBernoulliModel(
                    eps=float(model_cfg.get("eps", 0.05)),
                    drift=float(model_cfg.get("drift", 0.05)),
                    mid=float(model_cfg.get("mid", 0.5)),
                ),
            )
        ]
    if family == "uniform-spread":
        return [
            (
                "uniform-spread",
                UniformSpreadModel(
                    lows=tuple(model_cfg["lows"]),
                    highs=tuple(model_cfg["highs"]),
                    spreads=tuple(model_cfg["spreads"]),
                ),
            )
        ]
    parser.error(f"unknown model family {family!r}")


def _out_dir(args, cfg) -> Path:
    out = Path(_setting(args, cfg, "out", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def cmd_simulate(args, parser) -> int:
    cfg = _load_config(args.config, parser) if args.config else {"version": 1}
    seed = _setting(args, cfg, "seed", 0, int)
    threads = _setting(args, cfg, "threads", 1, int)
    T = _setting(args, cfg, "T", 1000, int)
    reps = _setting(args, cfg, "reps", 10, int)
    budget = _setting(args, cfg, "budget", 1.0, float)
    rho = _setting(args, cfg, "rho", 0.0, float)
    if args.quick:
        T, reps = min(T, 200), min(reps, 5)
    spec = _policy_spec(args, cfg, parser)
    models = build_models(args, cfg, parser, T)
    out = _out_dir(args, cfg)

    summary = {
        "version": CONFIG_VERSION,
        "command": "simulate",
        "seed": seed,
        "T": T,
        "reps": reps,
        "budget": budget,
        "rho": rho,
        "runs": [],
    }
    for model_name, model in models:
        def factory(num_options, b, _spec=spec, _model=model):
            return build_policy(_spec, num_options, b, rho, model=_model)

        trajectory = run_experiment(
            factory, model, T, reps, rho=rho, budget=budget, seed=seed, threads=threads
        )
        csv_path = out / f"regret_{trajectory.policy_id}_{model_name}.csv".replace("/", "-")
        write_trajectory_csv(trajectory, csv_path)
        run_summary = {
            "model": model_name,
            "policy": trajectory.policy_id,
            "cumulative_regret": float(trajectory.cumulative[-1]),
            "csv": csv_path.name,
        }
        horizons = [h for h in cfg.get("horizons", []) if h <= T]
        if horizons:
            marks = trajectory.cumulative_at(horizons)
            run_summary["horizons"] = horizons
            run_summary["cumulative_at_horizons"] = [float(x) for x in marks]
            if len(horizons) >= 3 and max(horizons) >= 10 * min(horizons):
                run_summary["growth_ratios"] = [
                    float(x) for x in slope_check(horizons, marks)
                ]
        summary["runs"].append(run_summary)
        print(f"{trajectory.policy_id} on {model_name}: "
              f"R_{T} = {trajectory.cumulative[-1]:.6g} ({reps} reps)")
    _write_json(out / "simulate_summary.json", summary)
    return 0


def _parse_warmup(args, cfg):
    start = _setting(args, cfg, "warmup_start")
    end = _setting(args, cfg, "warmup_end")
    cfg_range = cfg.get("warmup")
    if start is None and end is None and cfg_range:
        start, end = cfg_range
    if (start is None) != (end is None):
        raise KeyError("warmup needs both a start and an end date")
    if start is None:
        return None
    return (Date.fromisoformat(str(start)), Date.fromisoformat(str(end)))


def _load_history(args, cfg, parser) -> bt.PriceHistory:
    path = _setting(args, cfg, "history")
    if path is None:
        parser.error("no history CSV given (config key \"history\" or --history)")
    bounds = PriceBounds(
        lower=_setting(args, cfg, "bound_lower", 0.0, float),
        upper=_setting(args, cfg, "bound_upper", 1000.0, float),
    )
    return bt.ingest_csv(path, bounds)


def cmd_backtest(args, parser) -> int:
    cfg = _load_config(args.config, parser) if args.config else {"version": 1}
    try:
        history = _load_history(args, cfg, parser)
        budget = _setting(args, cfg, "budget", 250000.0, float)
        rho = _setting(args, cfg, "rho", 0.0, float)
        lag = _setting(args, cfg, "lag_days", 2, int)
        warmup = _parse_warmup(args, cfg)
        spec = _policy_spec(args, cfg, parser)
        policy = build_policy(spec, history.num_options, budget, rho)
        report = bt.run_backtest(policy, history, budget, rho=rho, lag_days=lag, warmup=warmup)
    except (bt.IngestionError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = _out_dir(args, cfg)
    report.write_csv(out / "backtest_report.csv")
    report.write_summary(out / "backtest_summary.json")
    sharpe = report.sharpe
    print(
        f"{report.policy_id}: {len(report.dates)} days, total profit "
        f"{report.total_profit:.6g}, sharpe {'n/a' if np.isnan(sharpe) else f'{sharpe:.4f}'}"
    )
    return 0


def cmd_sweep(args, parser) -> int:
    cfg = _load_config(args.config, parser) if args.config else {"version": 1}
    try:
        history = _load_history(args, cfg, parser)
        lag = _setting(args, cfg, "lag_days", 2, int)
        warmup = _parse_warmup(args, cfg)
        spec = _policy_spec(args, cfg, parser)
        budgets = [float(b) for b in _setting(args, cfg, "budgets", [1.0], _parse_list)]
        rhos = [float(r) for r in _setting(args, cfg, "rhos", [0.0, 0.002], _parse_list)]

        def factory(num_options, budget, rho):
            return build_policy(spec, num_options, budget, rho)

        reports = bt.budget_sweep(factory, history, budgets, rhos, lag_days=lag, warmup=warmup)
    except (bt.IngestionError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = _out_dir(args, cfg)
    bt.write_sweep_csv(reports, out / "sweep.csv")
    _write_json(
        out / "sweep_summary.json",
        {"version": CONFIG_VERSION, "command": "sweep", "cells": [r.summary() for r in reports]},
    )
    print(f"swept {len(reports)} (budget, rho) cells -> {out / 'sweep.csv'}")
    return 0


def _parse_list(value):
    if isinstance(value, (list, tuple)):
        return list(value)
    return [item for item in str(value).split(",") if item]


def cmd_verify(args, parser) -> int:
    cfg = _load_config(args.config, parser) if args.config else {"version": 1}
    seed = _setting(args, cfg, "seed", 0, int)
    results = vf.run_verify(seed=seed, quick=args.quick)
    failed = False
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        failed = failed or not result.passed
        print(f"{status} {result.name}: {result.detail}")
    if args.out:
        _write_json(
            Path(args.out) / "verify_summary.json",
            {
                "version": CONFIG_VERSION,
                "command": "verify",
                "results": [vars(r) for r in results],
            },
        )
    return 1 if failed else 0


def cmd_bench(args, parser) -> int:
    cfg = _load_config(args.config, parser) if args.config else {"version": 1}
    seed = _setting(args, cfg, "seed", 0, int)
    cases = None
    if args.quick:
        cases = [(2, 8, 256), (2, 8, 512), (4, 8, 256)]
    rows = vf.run_bench(cases=cases, seed=seed)
    out = _out_dir(args, cfg)
    path = out / "bench.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("K,t,alpha,median_seconds\n")
        for row in rows:
            fh.write(
                f"{row.num_options},{row.days},{row.grid_intervals},{row.median_seconds!r}\n"
            )
    _write_json(
        out / "bench_summary.json",
        {"version": CONFIG_VERSION, "command": "bench", "rows": [vars(r) for r in rows]},
    )
    for row in rows:
        print(
            f"K={row.num_options} t={row.days} alpha={row.grid_intervals}: "
            f"{row.median_seconds * 1e3:.3f} ms (median of {row.repeats})"
        )
    return 0


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file (version %d)" % CONFIG_VERSION)
    sub.add_argument("--seed", type=int, help="experiment seed")
    sub.add_argument("--out", help="output directory (default .)")
    sub.add_argument("--threads", type=int, help="worker cap; 1 reproduces parallel results")
    sub.add_argument("--quick", action="store_true", help="reduced sizes for smoke runs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="virtualbid",
        description="Budget-constrained bidding policies for two-settlement markets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthetic-market regret experiment")
    _add_common(p)
    p.add_argument("--model", choices=["lower-bound", "uniform-bernoulli", "uniform-spread"])
    p.add_argument("--T", type=int, help="horizon in days")
    p.add_argument("--reps", type=int, help="replications")
    p.add_argument("--budget", type=float)
    p.add_argument("--rho", type=float, help="risk weight")
    p.add_argument("--policy", help="policy type (dpds, zero, sa, ucbid-gr, svm-gr, constant, oracle)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("backtest", help="replay a policy over a price history CSV")
    _add_common(p)
    p.add_argument("--history", help="price history CSV path")
    p.add_argument("--budget", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--lag-days", type=int, dest="lag_days")
    p.add_argument("--bound-lower", type=float, dest="bound_lower")
    p.add_argument("--bound-upper", type=float, dest="bound_upper")
    p.add_argument("--warmup-start", dest="warmup_start")
    p.add_argument("--warmup-end", dest="warmup_end")
    p.add_argument("--policy")
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("sweep", help="backtest across budget and risk-weight grids")
    _add_common(p)
    p.add_argument("--history")
    p.add_argument("--budgets", help="comma-separated budgets")
    p.add_argument("--rhos", help="comma-separated risk weights")
    p.add_argument("--lag-days", type=int, dest="lag_days")
    p.add_argument("--bound-lower", type=float, dest="bound_lower")
    p.add_argument("--bound-upper", type=float, dest="bound_upper")
    p.add_argument("--warmup-start", dest="warmup_start")
    p.add_argument("--warmup-end", dest="warmup_end")
    p.add_argument("--policy")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the oracle self-check suites")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="time the daily DP across problem sizes")
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except KeyError as exc:
        parser.error(f"missing or unknown config key: {exc}")
        return 2  # unreachable; parser.error exits
    except Exception as exc:  # runtime failure, not usage
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
