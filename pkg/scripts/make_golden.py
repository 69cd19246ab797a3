#!/usr/bin/env python3
"""Regenerate the bundled 30-day synthetic price history and its expected
backtest report (the regression fixtures under tests/data/).

Run from the repository root:

    python scripts/make_golden.py

The fixtures are deterministic: a fixed seed generates the history, and the
replay is seed-free, so rerunning this script must reproduce the checked-in
bytes exactly unless the engine's behavior changed on purpose.
"""

from __future__ import annotations

import sys
from datetime import date, timedelta
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from virtualbid.backtest import ingest_csv, run_backtest
from virtualbid.dpds import DpdsPolicy
from virtualbid.market_model import PriceBounds

DATA_DIR = Path(__file__).resolve().parent.parent / "tests" / "data"
SEED = 20240101
DAYS = 30
ZONE = "golden"
BUDGET = 200.0
WARMUP = (date(2024, 1, 1), date(2024, 1, 10))
BOUNDS = PriceBounds(0.0, 1000.0)

# Persistent hourly biases so the learner has something to find: hour 7 pays
# demand bids, hour 19 pays supply bids, the rest is noise.
HOUR_BIAS = {7: 6.0, 19: -6.0}


def generate_history_csv(path: Path) -> None:
    rng = np.random.default_rng(SEED)
    lines = ["date,zone,hour,da_price,rt_price"]
    start = date(2024, 1, 1)
    for d in range(DAYS):
        for hour in range(24):
            da = rng.uniform(25.0, 75.0)
            rt = da + HOUR_BIAS.get(hour, 0.0) + rng.normal(0.0, 8.0)
            lines.append(
                f"{start + timedelta(days=d)},{ZONE},{hour},{da:.6f},{rt:.6f}"
            )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def main() -> int:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    history_path = DATA_DIR / "golden_history.csv"
    generate_history_csv(history_path)
    history = ingest_csv(history_path, BOUNDS)
    policy = DpdsPolicy(history.num_options, BUDGET)
    report = run_backtest(policy, history, BUDGET, lag_days=2, warmup=WARMUP)
    report.write_csv(DATA_DIR / "golden_report.csv")
    report.write_summary(DATA_DIR / "golden_summary.json")
    print(f"wrote {history_path}")
    print(f"wrote {DATA_DIR / 'golden_report.csv'} ({len(report.dates)} test days)")
    print(f"wrote {DATA_DIR / 'golden_summary.json'} (total profit {report.total_profit:.4f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
