"""Shared bidding-policy interface plus trivial reference policies.

A policy sees translated prices only after the harness releases them (the
replay engine owns any observation lag) and produces one bid vector per day.
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np

from .benchmarks import project_to_feasible
from .market_model import BidVector


@runtime_checkable
class Policy(Protocol):
    name: str

    def next_bid(self) -> BidVector: ...

    def observe(self, da: np.ndarray, rt: np.ndarray) -> None: ...


class ZeroPolicy:
    """Never bids; useful as a profit/regret baseline."""

    name = "zero"

    def __init__(self, num_options: int, budget: float):
        self.num_options = num_options
        self.budget = budget

    def next_bid(self) -> BidVector:
        return BidVector.zero(self.num_options, self.budget)

    def observe(self, da: np.ndarray, rt: np.ndarray) -> None:
        pass


class ConstantPolicy:
    """Bids a fixed vector every day (projected onto the feasible set)."""

    def __init__(self, num_options: int, budget: float, bid, name: str = "constant"):
        bid = np.broadcast_to(np.asarray(bid, dtype=float), (num_options,))
        self._bid = BidVector(project_to_feasible(bid, budget), budget)
        self.name = name

    def next_bid(self) -> BidVector:
        return self._bid

    def observe(self, da: np.ndarray, rt: np.ndarray) -> None:
        pass


class OraclePolicy(ConstantPolicy):
    """Bids a known optimal vector; the zero-regret reference."""

    def __init__(self, num_options: int, budget: float, optimum):
        super().__init__(num_options, budget, optimum, name="oracle")
