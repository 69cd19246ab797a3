#!/usr/bin/env python3
"""Regret-growth experiment: how fast does the budget-grid learner close the
gap to the distribution-aware optimum?

Runs the learner on a drifting uniform/Bernoulli market, prints cumulative
regret at several horizons together with the R_T / sqrt(T log T) growth
ratios (bounded ratios mean sublinear, near-sqrt regret), and writes the full
trajectory CSV.

    python scripts/regret_slope_experiment.py [--reps 50] [--out results/]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from virtualbid.dpds import DpdsPolicy, GridSchedule
from virtualbid.models import UniformBernoulliModel
from virtualbid.simulator import run_experiment, slope_check, write_trajectory_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--T", type=int, default=8000)
    parser.add_argument("--reps", type=int, default=50)
    parser.add_argument("--eps", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=20260809)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", default="results")
    args = parser.parse_args()

    model = UniformBernoulliModel(eps=args.eps, drift=args.eps)
    horizons = [h for h in (500, 2000, 8000) if h <= args.T]

    def factory(num_options, budget):
        return DpdsPolicy(num_options, budget, GridSchedule(alpha=1.0, gamma=0.5))

    trajectory = run_experiment(
        factory,
        model,
        T=args.T,
        replications=args.reps,
        budget=1.0,
        seed=args.seed,
        threads=args.threads,
    )
    cum = trajectory.cumulative_at(horizons)
    print(f"policy {trajectory.policy_id}, {args.reps} replications, eps={args.eps}")
    for T, r in zip(horizons, cum):
        print(f"  T={T:>6d}  R_T={r:9.4f}  per-day={r / T:.3e}")
    if len(horizons) >= 3:
        ratios = slope_check(horizons, cum)
        print(f"  growth ratios R_T/sqrt(T log T): {[f'{x:.4f}' for x in ratios]}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "regret_slope_trajectory.csv"
    write_trajectory_csv(trajectory, path)
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
