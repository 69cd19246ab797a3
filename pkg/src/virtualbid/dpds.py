"""Budget-grid dynamic program for next-day bid selection.

Each day the budget interval [0, B] is discretized into an integer grid whose
density grows with the number of observed days. A K-stage Bellman recursion
then maximizes the summed per-option empirical mean-variance payoff over all
grid-valued bid vectors inside the budget. The recursion works entirely in
integer grid indices; bids materialize as ``index * B / grid_size`` only at
the boundary, so budget accounting never accumulates float error.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .market_model import BidVector
from .payoff_stats import BreakpointTable, mean_variance_combine

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSchedule:
    """Grid-density schedule: size(t) = max(ceil(alpha * t**gamma), 2).

    ``override`` replaces the power law entirely (the floor at 2 still
    applies); pass e.g. ``lambda t: t - 1`` for a linearly growing grid.
    """

    alpha: float = 1.0
    gamma: float = 0.5
    override: Callable[[int], int] | None = None

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.gamma < 0.5 and self.override is None:
            logger.warning(
                "gamma=%g < 0.5: the sublinear-regret guarantee no longer applies",
                self.gamma,
            )


def grid_size(t: int, schedule: GridSchedule) -> int:
    """Number of grid intervals for day count t (grid has size+1 points)."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if schedule.override is not None:
        return max(int(schedule.override(t)), 2)
    return max(math.ceil(schedule.alpha * t**schedule.gamma), 2)


@dataclass
class DpSolution:
    """Exact optimum of the grid-restricted bid allocation problem.

    ``value_table[n, b]`` is the best total score using the first n options
    with b budget units; ``choice_table[n-1, b]`` is the grid index option n
    bids in that optimum. Backtracking starts from the last option at the
    full budget, so ties resolve toward the smallest bid per stage with the
    last option allocated first.
    """

    bid: BidVector
    value: float
    bid_indices: np.ndarray
    value_table: np.ndarray
    choice_table: np.ndarray
    grid_intervals: int
    budget: float

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.grid_intervals + 1) * (self.budget / self.grid_intervals)


def grid_scores(
    table: BreakpointTable, grid_values: np.ndarray, rho: float
) -> tuple[np.ndarray, int]:
    """Mean-variance score at each grid point, plus the freeze index.

    The freeze index is the smallest grid index whose bid covers every
    breakpoint; larger stage bids cannot change this option's payoff and only
    consume budget, so the stage loop never considers them.
    """
    rbar, vbar, idx = table.stats_at(grid_values)
    scores = mean_variance_combine(rbar, vbar, table.t, rho)
    covered = np.flatnonzero(idx[1:] == table.size - 1)
    freeze = int(covered[0]) + 1 if covered.size else grid_values.size - 1
    return np.asarray(scores, dtype=float), freeze


# Reusable per-thread stage workspace. The stage maximand V[j - i] over the
# (j, i) plane is a Hankel-style matrix, so instead of materializing an index
# matrix we lay V into a padded buffer whose left half is -inf and read it
# through a negative-stride view: cells with i > j land in the padding and
# come out -inf, masking infeasible bids with no extra pass. Buffers are
# preallocated (page faults dominate the arithmetic otherwise) and
# thread-local so concurrent solves cannot clobber each other.
_stage_tls = threading.local()


def _stage_arrays(alpha_t: int):
    cache = getattr(_stage_tls, "cache", None)
    if cache is None or cache[0] != alpha_t:
        padded = np.full(2 * alpha_t + 1, -np.inf)
        stride = padded.strides[0]
        shifted = np.lib.stride_tricks.as_strided(
            padded[alpha_t:], shape=(alpha_t + 1, alpha_t + 1), strides=(stride, -stride)
        )
        cand = np.empty((alpha_t + 1, alpha_t + 1))
        cache = (alpha_t, padded, shifted, np.arange(alpha_t + 1), cand)
        _stage_tls.cache = cache
    return cache[1:]


def solve(
    tables: Sequence[BreakpointTable],
    budget: float,
    alpha_t: int,
    rho: float = 0.0,
) -> DpSolution:
    """Exact maximizer of the summed option scores over the budget grid.

    Backward-induction over options: ``V[n, j]`` is the best achievable score
    using options 1..n and j grid units of budget. Stage maximization scans
    candidate bids in increasing order under a strict-improvement rule, so
    among exact ties the smallest stage bid wins (a zero bid beats an
    equal-valued positive one). Per-day cost is O(K * max(t, alpha_t**2)).
    """
    if alpha_t < 2:
        raise ValueError("grid must have at least 2 intervals")
    if budget <= 0:
        raise ValueError("budget must be positive")
    num_options = len(tables)
    if num_options == 0:
        raise ValueError("need at least one option table")
    t = tables[0].t
    if t < 1:
        raise ValueError("tables must hold at least one observation")
    if any(tb.t != t for tb in tables):
        raise ValueError("all option tables must share the same day count")

    grid_values = np.arange(alpha_t + 1) * (budget / alpha_t)
    padded, shifted, ii, cand = _stage_arrays(alpha_t)

    value_table = np.zeros((num_options + 1, alpha_t + 1))
    choice_table = np.zeros((num_options, alpha_t + 1), dtype=np.int64)
    values = value_table[0]
    for n, table in enumerate(tables):
        scores, freeze = grid_scores(table, grid_values, rho)
        padded[alpha_t:] = values  # shifted[j, i] now reads values[j - i]
        np.add(shifted, scores[None, :], out=cand)
        if freeze < alpha_t:
            cand[:, freeze + 1 :] = -np.inf
        # argmax returns the first maximizer, i.e. the smallest stage bid;
        # column 0 adds an exact 0.0 so "keep the previous stages' value"
        # participates in the tie rule unchanged.
        choice = np.argmax(cand, axis=1)
        values = cand[ii, choice]
        value_table[n + 1] = values
        choice_table[n] = choice

    bid_indices = np.zeros(num_options, dtype=np.int64)
    b = alpha_t
    for n in range(num_options - 1, -1, -1):
        bid_indices[n] = choice_table[n, b]
        b -= bid_indices[n]

    bid = BidVector(bid_indices * (budget / alpha_t), budget)
    return DpSolution(
        bid=bid,
        value=float(value_table[num_options, alpha_t]),
        bid_indices=bid_indices,
        value_table=value_table,
        choice_table=choice_table,
        grid_intervals=alpha_t,
        budget=budget,
    )


class DpdsPolicy:
    """Online bidding policy: refit the budget-grid DP on all history daily.

    Day one bids the zero vector; afterwards every observed day updates the
    per-option breakpoint tables and the next bid is the exact grid optimum
    of the empirical mean-variance objective.
    """

    def __init__(
        self,
        num_options: int,
        budget: float,
        schedule: GridSchedule | None = None,
        rho: float = 0.0,
    ):
        if rho < 0:
            raise ValueError("risk weight rho must be nonnegative")
        self.num_options = num_options
        self.budget = budget
        self.schedule = schedule or GridSchedule()
        self.rho = rho
        self.tables = [BreakpointTable() for _ in range(num_options)]

    @property
    def name(self) -> str:
        return f"dpds(rho={self.rho:g})"

    @property
    def days_observed(self) -> int:
        return self.tables[0].t

    def observe(self, da: np.ndarray, rt: np.ndarray) -> None:
        if len(da) != self.num_options or len(rt) != self.num_options:
            raise ValueError("observation length does not match option count")
        for table, lam_k, pi_k in zip(self.tables, da, rt):
            table.update(float(lam_k), float(pi_k))

    def next_bid(self) -> BidVector:
        t = self.days_observed
        if t == 0:
            return BidVector.zero(self.num_options, self.budget)
        alpha_t = grid_size(t, self.schedule)
        return solve(self.tables, self.budget, alpha_t, self.rho).bid
