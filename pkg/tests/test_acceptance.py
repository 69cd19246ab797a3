"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings. The regret-slope and lower-bound criteria simulate tens of
thousands of policy days and take a couple of minutes combined.
"""

import math
import time
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pytest

from virtualbid.backtest import PriceHistory, ingest_csv, run_backtest
from virtualbid.dpds import DpdsPolicy, GridSchedule
from virtualbid.market_model import PriceBounds
from virtualbid.models import UniformBernoulliModel
from virtualbid.oracle import analytic_optimum
from virtualbid.simulator import lower_bound_family, run_experiment, slope_check
from virtualbid.verify import (
    dp_vs_brute_suite,
    erm_equivalence_suite,
    incremental_vs_batch_suite,
    mean_variance_identity_suite,
    run_bench,
)
from virtualbid.backtest import sharpe_ratio

DATA_DIR = Path(__file__).parent / "data"


def report(criterion: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {criterion:02d} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_criterion_01_dp_exactness():
    start = time.perf_counter()
    result = dp_vs_brute_suite(np.random.default_rng(101), instances=1000)
    elapsed = time.perf_counter() - start
    report(
        1,
        result.passed and elapsed < 30.0,
        f"DP == brute force on 1000 instances in {elapsed:.1f}s (limit 30s); {result.detail}",
    )


def test_criterion_02_erm_mckp_equivalence():
    result = erm_equivalence_suite(np.random.default_rng(202), instances=200)
    report(2, result.passed, f"knapsack == enumerated empirical optimum; {result.detail}")


def test_criterion_03_incremental_statistics():
    result = incremental_vs_batch_suite(np.random.default_rng(303), streams=500, max_days=200)
    report(3, result.passed, f"incremental == batch within 1e-9; {result.detail}")


def test_criterion_04_mean_variance_identity():
    result = mean_variance_identity_suite(np.random.default_rng(404), instances=200, max_days=200)
    report(4, result.passed, f"both mean-variance forms agree within 1e-9; {result.detail}")


def test_criterion_05_regret_slope():
    # The policy never looks at the horizon, so one 8000-day run's prefixes
    # are bitwise-identical to separate shorter runs with the same streams.
    start = time.perf_counter()
    model = UniformBernoulliModel(eps=0.05, drift=0.05)

    def factory(num_options, budget):
        return DpdsPolicy(num_options, budget, GridSchedule(alpha=1.0, gamma=0.5))

    horizons = [500, 2000, 8000]
    trajectory = run_experiment(
        factory, model, T=8000, replications=50, rho=0.0, budget=1.0, seed=20260809
    )
    cum = trajectory.cumulative_at(horizons)
    ratios = slope_check(horizons, cum)
    spread = float(ratios.max() / ratios.min())
    per_day_short = cum[0] / horizons[0]
    per_day_long = cum[2] / horizons[2]
    elapsed = time.perf_counter() - start
    ok = spread <= 3.0 and per_day_long < per_day_short and elapsed < 600.0
    report(
        5,
        ok,
        f"R_T = {np.round(cum, 3).tolist()}, ratio spread {spread:.2f} (limit 3), "
        f"per-day regret {per_day_short:.2e} -> {per_day_long:.2e}, {elapsed:.0f}s",
    )


def test_criterion_06_lower_bound_construction():
    T = 2000
    f1, f2, eps = lower_bound_family(T)

    # (i) closed forms: always-bid loses eps/day under f1, never-bid under f2.
    always_regret = analytic_optimum(f1, 1.0, 0.0).value - f1.expected_payoff(1.0)
    never_regret = analytic_optimum(f2, 1.0, 0.0).value - f2.expected_payoff(0.0)
    closed_ok = abs(always_regret - eps) <= 1e-12 and abs(never_regret - eps) <= 1e-12

    # (ii) the policy itself cannot beat the constructed pair.
    def factory(num_options, budget):
        return DpdsPolicy(num_options, budget, GridSchedule(alpha=1.0, gamma=0.5))

    r1 = run_experiment(factory, f1, T=T, replications=50, seed=606).cumulative[-1]
    r2 = run_experiment(factory, f2, T=T, replications=50, seed=606).cumulative[-1]
    bound = math.sqrt(T) / (16 * math.sqrt(5))
    measured = max(r1, r2)
    report(
        6,
        closed_ok and measured >= bound and r1 + r2 >= 2 * bound,
        f"per-day closed forms match eps={eps:.6f} to 1e-12; "
        f"max regret {measured:.3f} >= sqrt(T)/(16*sqrt(5)) = {bound:.4f}",
    )


def test_criterion_07_complexity_scaling():
    rows = run_bench(cases=[(2, 8, 512), (2, 8, 1024), (4, 8, 512)], repeats=5, seed=707)
    by_case = {(r.num_options, r.grid_intervals): r.median_seconds for r in rows}
    alpha_ratio = by_case[(2, 1024)] / by_case[(2, 512)]
    k_ratio = by_case[(4, 512)] / by_case[(2, 512)]
    ok = 2.5 <= alpha_ratio <= 6.0 and 1.5 <= k_ratio <= 3.0
    report(
        7,
        ok,
        f"grid-doubling time ratio {alpha_ratio:.2f} in [2.5, 6]; "
        f"option-doubling {k_ratio:.2f} in [1.5, 3] (medians of 5)",
    )


def test_criterion_08_sharpe_formula():
    hand = math.sqrt(3) * 2
    base = [0.01, 0.02, 0.03]
    value = sharpe_ratio(base)
    scale_ok = all(
        abs(sharpe_ratio([c * r for r in base]) - value) <= 1e-9 for c in (0.5, 3.0, 1e-4, 250.0)
    )
    report(
        8,
        abs(value - hand) <= 1e-9 and scale_ok,
        f"sharpe([.01,.02,.03]) = {value:.10f} == sqrt(3)*2; scale-invariant to 1e-9",
    )


def _random_history(rng, days=10) -> PriceHistory:
    start = date(2024, 3, 1)
    da = rng.uniform(20.0, 60.0, size=(days, 1, 24))
    rt = da + rng.normal(0.0, 6.0, size=(days, 1, 24))
    return PriceHistory(
        dates=[start + timedelta(days=d) for d in range(days)],
        zones=["z0"],
        bounds=PriceBounds(0.0, 1000.0),
        da=da,
        rt=rt,
        complete=np.ones(days, dtype=bool),
    )


def test_criterion_09_no_lookahead():
    rng = np.random.default_rng(909)
    histories = 50
    for i in range(histories):
        history = _random_history(rng)
        t = int(rng.integers(3, 11))  # 1-based day whose bid we pin
        base = run_backtest(
            DpdsPolicy(history.num_options, 50.0), history, 50.0, lag_days=2, record_bids=True
        )
        perturbed = PriceHistory(
            dates=history.dates,
            zones=history.zones,
            bounds=history.bounds,
            da=history.da.copy(),
            rt=history.rt.copy(),
            complete=history.complete,
        )
        # Prices on days >= t-1 (0-based index t-2) must not affect bid t.
        perturbed.da[t - 2 :] += rng.uniform(1.0, 20.0)
        perturbed.rt[t - 2 :] -= rng.uniform(1.0, 20.0)
        shifted = run_backtest(
            DpdsPolicy(history.num_options, 50.0), perturbed, 50.0, lag_days=2, record_bids=True
        )
        assert np.array_equal(base.bids[t - 1], shifted.bids[t - 1]), f"history {i}, day {t}"
    report(9, True, f"bids invariant to day >= t-1 prices on {histories} random histories")


def test_criterion_10_golden_backtest_regression(tmp_path):
    history = ingest_csv(DATA_DIR / "golden_history.csv", PriceBounds(0.0, 1000.0))
    policy = DpdsPolicy(history.num_options, 200.0)
    rpt = run_backtest(
        policy, history, 200.0, lag_days=2, warmup=(date(2024, 1, 1), date(2024, 1, 10))
    )
    rpt.write_csv(tmp_path / "report.csv")
    rpt.write_summary(tmp_path / "summary.json")
    csv_ok = (tmp_path / "report.csv").read_bytes() == (DATA_DIR / "golden_report.csv").read_bytes()
    json_ok = (
        tmp_path / "summary.json"
    ).read_bytes() == (DATA_DIR / "golden_summary.json").read_bytes()
    report(
        10,
        csv_ok and json_ok,
        "bundled 30-day history reproduces the checked-in report and summary bitwise",
    )
