"""Trading options, demand/supply bid translation, and daily settlement.

A trading option is a (zone, hour, side) triple. Demand and supply bids are
mapped onto a single payoff form by a change of variables against the known
day-ahead price bounds: after translation, every option pays
``(rt - da) * 1{bid >= da}`` regardless of its original side, and a translated
bid of 0 means "do not bid".
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

HOURS_PER_DAY = 24


class Side(enum.Enum):
    DEMAND = "demand"
    SUPPLY = "supply"


@dataclass(frozen=True)
class OptionId:
    """One tradable (zone, hour, side) slot."""

    zone: str
    hour: int
    side: Side

    def __post_init__(self):
        if not 0 <= self.hour < HOURS_PER_DAY:
            raise ValueError(f"hour must be in [0, 24), got {self.hour}")

    def __str__(self) -> str:
        return f"{self.zone}:h{self.hour:02d}:{self.side.value}"


_SIDE_ORDER = (Side.DEMAND, Side.SUPPLY)


@dataclass(frozen=True)
class PriceBounds:
    """Known lower/upper bounds on day-ahead prices for one ISO."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"need lower < upper, got [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower


def translate(value: float, side: Side, bounds: PriceBounds) -> float:
    """Map a raw price or bid into translated coordinates.

    Demand-side values map to ``v - lower``, supply-side to ``upper - v``.
    Values outside the bounds are allowed; they simply translate outside
    ``(0, upper - lower)`` and settle normally.
    """
    if side is Side.DEMAND:
        return value - bounds.lower
    return bounds.upper - value


def untranslate(value: float, side: Side, bounds: PriceBounds) -> float:
    """Inverse of :func:`translate` for both sides."""
    if side is Side.DEMAND:
        return value + bounds.lower
    return bounds.upper - value


def enumerate_options(zones: list[str]) -> list[OptionId]:
    """The full option universe: K = 2 * len(zones) * 24 entries.

    Ordering is zone-major, hour-minor, side-last (demand before supply) in
    the order zones are given. This ordering is a stable external contract:
    CSV columns and report vectors index options the same way on every run.
    """
    if not zones:
        raise ValueError("zone list must be nonempty")
    return [
        OptionId(zone, hour, side)
        for zone in zones
        for hour in range(HOURS_PER_DAY)
        for side in _SIDE_ORDER
    ]


@dataclass
class MarketDay:
    """One day's translated day-ahead and real-time price vectors."""

    da: np.ndarray
    rt: np.ndarray

    def __post_init__(self):
        self.da = np.asarray(self.da, dtype=float)
        self.rt = np.asarray(self.rt, dtype=float)
        if self.da.shape != self.rt.shape or self.da.ndim != 1:
            raise ValueError(
                f"da/rt must be 1-d vectors of equal length, got {self.da.shape} vs {self.rt.shape}"
            )

    @property
    def num_options(self) -> int:
        return self.da.size

    @property
    def spread(self) -> np.ndarray:
        return self.rt - self.da


_BUDGET_SLACK = 1e-9


@dataclass
class BidVector:
    """Nonnegative translated bids with an aggregate 1-norm budget cap."""

    values: np.ndarray
    budget: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise ValueError("bid vector must be 1-d")
        if self.budget < 0:
            raise ValueError("budget must be nonnegative")
        if (self.values < -_BUDGET_SLACK).any():
            raise ValueError("bids must be nonnegative")
        total = float(self.values.sum())
        if total > self.budget * (1 + _BUDGET_SLACK) + _BUDGET_SLACK:
            raise ValueError(f"bids sum to {total}, above budget {self.budget}")

    @property
    def num_options(self) -> int:
        return self.values.size

    @classmethod
    def zero(cls, num_options: int, budget: float) -> "BidVector":
        return cls(np.zeros(num_options), budget)


def settle(bid: BidVector, day: MarketDay) -> tuple[float, np.ndarray]:
    """Settle one day: returns (total payoff, per-option payoff vector).

    An option clears when ``bid >= da`` (ties clear, matching the demand-side
    rule; the raw supply-side tie ``bid <= da`` maps onto the same inclusive
    comparison after translation). Cleared options pay ``rt - da``. A zero
    bid means "not bidding" and never clears, even against a translated
    day-ahead price of exactly 0 (a raw price sitting on the bound).
    """
    if bid.num_options != day.num_options:
        raise ValueError(
            f"bid has {bid.num_options} options but day has {day.num_options}"
        )
    cleared = (bid.values >= day.da) & (bid.values > 0.0)
    per_option = np.where(cleared, day.rt - day.da, 0.0)
    return float(per_option.sum()), per_option
