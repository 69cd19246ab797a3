#!/usr/bin/env python3
"""Worst-case regret experiment on the adversarial two-model family.

The two models differ only by a +/- eps drift in the real-time price mean,
with eps shrinking like 1/sqrt(T); distinguishing them needs on the order of
T observations, so every policy must pay sqrt(T)-order regret on at least one
of them. This script measures a set of policies against that floor.

    python scripts/lower_bound_experiment.py [--T 2000] [--reps 50]
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from virtualbid.benchmarks import SaConfig, SaPolicy, UcbidGrPolicy
from virtualbid.dpds import DpdsPolicy, GridSchedule
from virtualbid.policies import ConstantPolicy, ZeroPolicy
from virtualbid.simulator import lower_bound_family, run_experiment


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--T", type=int, default=2000)
    parser.add_argument("--reps", type=int, default=50)
    parser.add_argument("--seed", type=int, default=606)
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()

    f1, f2, eps = lower_bound_family(args.T)
    floor = math.sqrt(args.T) / (16 * math.sqrt(5))
    print(f"T={args.T}, eps={eps:.6f}, regret floor sqrt(T)/(16*sqrt(5)) = {floor:.4f}")

    factories = {
        "dpds": lambda k, b: DpdsPolicy(k, b, GridSchedule(alpha=1.0, gamma=0.5)),
        "zero": ZeroPolicy,
        "always-bid": lambda k, b: ConstantPolicy(k, b, 1.0, name="always-bid"),
        "ucbid-gr": UcbidGrPolicy,
        "sa": lambda k, b: SaPolicy(k, b, SaConfig(a=1.0, c=0.5)),
    }
    print(f"{'policy':>12}  {'R(f1)':>9}  {'R(f2)':>9}  {'max':>9}  above floor?")
    for name, factory in factories.items():
        r1 = run_experiment(
            factory, f1, args.T, args.reps, seed=args.seed, threads=args.threads
        ).cumulative[-1]
        r2 = run_experiment(
            factory, f2, args.T, args.reps, seed=args.seed, threads=args.threads
        ).cumulative[-1]
        worst = max(r1, r2)
        print(f"{name:>12}  {r1:9.4f}  {r2:9.4f}  {worst:9.4f}  {worst >= floor}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
