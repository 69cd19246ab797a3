"""Historical-data replay: CSV ingestion, lagged policy replay, profit and
Sharpe reporting, and budget sweeps.

Input CSV contract (bit-exact): header ``date,zone,hour,da_price,rt_price``,
ISO-8601 dates, one row per (date, zone, hour), UTF-8, comma-separated.
Empty price fields mark the whole day incomplete; incomplete days are
excluded from both learning and settlement, with counts logged.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from datetime import date as Date
from datetime import timedelta

import numpy as np

from .market_model import MarketDay, PriceBounds, enumerate_options, settle

logger = logging.getLogger(__name__)

CSV_HEADER = ["date", "zone", "hour", "da_price", "rt_price"]


class IngestionError(ValueError):
    """Malformed input data; the CLI maps this to a nonzero exit."""


@dataclass
class PriceHistory:
    """Raw per-day (zone, hour) price panels plus the ISO price bounds."""

    dates: list[Date]
    zones: list[str]
    bounds: PriceBounds
    da: np.ndarray  # (days, zones, 24), NaN = missing
    rt: np.ndarray
    complete: np.ndarray  # (days,) bool

    @property
    def num_options(self) -> int:
        return 2 * len(self.zones) * 24

    @property
    def options(self):
        return enumerate_options(self.zones)

    def market_day(self, i: int) -> MarketDay:
        """Translated prices over the full option universe for day i.

        Option ordering is zone-major, hour-minor, side-last (demand then
        supply), matching :func:`enumerate_options`.
        """
        lo, hi = self.bounds.lower, self.bounds.upper
        da = np.stack([self.da[i] - lo, hi - self.da[i]], axis=-1).reshape(-1)
        rt = np.stack([self.rt[i] - lo, hi - self.rt[i]], axis=-1).reshape(-1)
        return MarketDay(da, rt)

    def complete_days(self) -> list[int]:
        return [i for i in range(len(self.dates)) if self.complete[i]]


def ingest_csv(path, bounds: PriceBounds) -> PriceHistory:
    """Parse and validate a price history file.

    Raises :class:`IngestionError` naming the offending line for malformed
    rows and for duplicate (date, zone, hour) records. Date gaps only warn;
    days with missing prices are kept but flagged incomplete.
    """
    records: dict[tuple[Date, str, int], tuple[float | None, float | None]] = {}
    zones: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise IngestionError(
                f"{path}: expected header {','.join(CSV_HEADER)!r}, got {header!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise IngestionError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
            raw_date, zone, raw_hour, raw_da, raw_rt = row
            try:
                day = Date.fromisoformat(raw_date.strip())
            except ValueError as exc:
                raise IngestionError(f"{path}:{lineno}: bad date {raw_date!r}: {exc}") from None
            try:
                hour = int(raw_hour)
            except ValueError:
                raise IngestionError(f"{path}:{lineno}: bad hour {raw_hour!r}") from None
            if not 0 <= hour < 24:
                raise IngestionError(f"{path}:{lineno}: hour {hour} outside [0, 24)")

            def parse_price(text: str, name: str) -> float | None:
                text = text.strip()
                if not text:
                    return None
                try:
                    return float(text)
                except ValueError:
                    raise IngestionError(
                        f"{path}:{lineno}: non-numeric {name} {text!r}"
                    ) from None

            key = (day, zone.strip(), hour)
            if key in records:
                raise IngestionError(
                    f"{path}:{lineno}: duplicate record for {key[0]} {key[1]} h{hour}"
                )
            records[key] = (parse_price(raw_da, "da_price"), parse_price(raw_rt, "rt_price"))
            zones.add(zone.strip())

    if not records:
        raise IngestionError(f"{path}: no data rows")
    dates = sorted({k[0] for k in records})
    zone_list = sorted(zones)
    for prev, cur in zip(dates, dates[1:]):
        if cur - prev != timedelta(days=1):
            logger.warning("date gap between %s and %s", prev, cur)

    da = np.full((len(dates), len(zone_list), 24), np.nan)
    rt = np.full_like(da, np.nan)
    date_idx = {d: i for i, d in enumerate(dates)}
    zone_idx = {z: i for i, z in enumerate(zone_list)}
    for (day, zone, hour), (da_price, rt_price) in records.items():
        if da_price is not None:
            da[date_idx[day], zone_idx[zone], hour] = da_price
        if rt_price is not None:
            rt[date_idx[day], zone_idx[zone], hour] = rt_price
    complete = ~(np.isnan(da).any(axis=(1, 2)) | np.isnan(rt).any(axis=(1, 2)))
    skipped = int((~complete).sum())
    if skipped:
        logger.warning("%d of %d days incomplete; excluded from replay", skipped, len(dates))
    return PriceHistory(
        dates=dates, zones=zone_list, bounds=bounds, da=da, rt=rt, complete=complete
    )


def sharpe_ratio(returns) -> float:
    """Annualization-free Sharpe: sqrt(T) * mean / sample std (T-1 denom).

    Returns NaN when undefined (fewer than two days, or zero variance);
    :func:`sharpe_undefined_reason` explains which.
    """
    r = np.asarray(returns, dtype=float)
    if r.size < 2:
        return float("nan")
    sd = r.std(ddof=1)
    if sd == 0.0:
        return float("nan")
    return float(math.sqrt(r.size) * r.mean() / sd)


def sharpe_undefined_reason(returns) -> str | None:
    r = np.asarray(returns, dtype=float)
    if r.size < 2:
        return "need at least 2 daily returns"
    if r.std(ddof=1) == 0.0:
        return "zero variance in daily returns"
    return None


@dataclass
class BacktestReport:
    """Daily profit series of one policy replay over the test range."""

    policy_id: str
    budget: float
    rho: float
    dates: list[Date]
    daily_profit: np.ndarray
    skipped_incomplete: int = 0
    bids: list[np.ndarray] = field(default_factory=list)

    @property
    def cumulative_profit(self) -> np.ndarray:
        return np.cumsum(self.daily_profit)

    @property
    def returns(self) -> np.ndarray:
        """Daily percentage returns: profit over the fixed daily budget."""
        return self.daily_profit / self.budget

    @property
    def total_profit(self) -> float:
        return float(self.daily_profit.sum())

    @property
    def sharpe(self) -> float:
        return sharpe_ratio(self.returns)

    def write_csv(self, path) -> None:
        cum = self.cumulative_profit
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["day", "profit", "cum_profit"])
            for day, profit, total in zip(self.dates, self.daily_profit, cum):
                writer.writerow([day.isoformat(), repr(float(profit)), repr(float(total))])

    def summary(self) -> dict:
        sharpe = self.sharpe
        out = {
            "policy": self.policy_id,
            "B": self.budget,
            "rho": self.rho,
            "total_profit": self.total_profit,
            "sharpe": None if math.isnan(sharpe) else sharpe,
            "days": len(self.dates),
        }
        if math.isnan(sharpe):
            out["sharpe_reason"] = sharpe_undefined_reason(self.returns)
        return out

    def write_summary(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, indent=2)
            fh.write("\n")


def run_backtest(
    policy,
    history: PriceHistory,
    budget: float,
    rho: float = 0.0,
    lag_days: int = 2,
    warmup: tuple[Date, Date] | None = None,
    record_bids: bool = False,
) -> BacktestReport:
    """Replay a policy over the complete days of a history.

    On day t the policy has been fed observations through day t - lag_days
    only (day indices count complete days in date order). Bids submitted for
    days inside the warmup range settle but are not recorded; the first bid
    after the warmup end triggers the policy's ``on_warmup_end`` hook, which
    is where training-based policies fit on the released observations.
    """
    if lag_days < 0:
        raise ValueError("lag_days must be nonnegative")
    day_indices = history.complete_days()
    if lag_days >= len(day_indices) and warmup is None:
        raise ValueError(
            f"observation lag of {lag_days} days exceeds the {len(day_indices)}-day history"
        )
    market_days = [history.market_day(i) for i in day_indices]
    dates = [history.dates[i] for i in day_indices]

    def in_test(d: Date) -> bool:
        return warmup is None or d > warmup[1]

    released = 0
    warmup_ended = warmup is None
    test_dates: list[Date] = []
    profits: list[float] = []
    bids: list[np.ndarray] = []
    for t, (day, d) in enumerate(zip(market_days, dates), start=1):
        while released < t - lag_days:
            policy.observe(market_days[released].da, market_days[released].rt)
            released += 1
        if not warmup_ended and in_test(d):
            if hasattr(policy, "on_warmup_end"):
                policy.on_warmup_end()
            warmup_ended = True
        bid = policy.next_bid()
        if record_bids:
            bids.append(bid.values.copy())
        if in_test(d):
            profit, _ = settle(bid, day)
            test_dates.append(d)
            profits.append(profit)

    return BacktestReport(
        policy_id=getattr(policy, "name", type(policy).__name__),
        budget=budget,
        rho=rho,
        dates=test_dates,
        daily_profit=np.array(profits, dtype=float),
        skipped_incomplete=len(history.dates) - len(day_indices),
        bids=bids,
    )


def budget_sweep(
    policy_factory,
    history: PriceHistory,
    budgets: list[float],
    rhos: list[float],
    lag_days: int = 2,
    warmup: tuple[Date, Date] | None = None,
) -> list[BacktestReport]:
    """Independent replays for every (budget, rho) cell.

    ``policy_factory(num_options, budget, rho)`` builds a fresh policy per
    cell; cells never share learning state.
    """
    reports = []
    for budget in budgets:
        for rho in rhos:
            policy = policy_factory(history.num_options, budget, rho)
            reports.append(
                run_backtest(
                    policy, history, budget, rho=rho, lag_days=lag_days, warmup=warmup
                )
            )
    return reports


def write_sweep_csv(reports: list[BacktestReport], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["B", "rho", "total_profit", "sharpe"])
        for report in reports:
            sharpe = report.sharpe
            writer.writerow(
                [
                    repr(float(report.budget)),
                    repr(float(report.rho)),
                    repr(report.total_profit),
                    "" if math.isnan(sharpe) else repr(sharpe),
                ]
            )
