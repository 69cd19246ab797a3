"""Exact reference solvers used to validate the fast paths.

Three independent routes to the same optima live here: exhaustive grid
enumeration (checks the dynamic program), a multiple-choice knapsack built
directly from the breakpoint tables with an exact branch-and-bound solver in
rational arithmetic (checks the empirical-average formulation), and
closed-form optima for the synthetic price models (the regret reference).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .market_model import BidVector
from .models import UniformBernoulliModel, UniformSpreadModel, UnsupportedModelError
from .payoff_stats import BreakpointTable

GRID_ENUMERATION_LIMIT = 10**7
MCKP_ITEM_LIMIT = 64
SPREAD_SUBSET_LIMIT = 16


class EnumerationGuardError(RuntimeError):
    """Raised instead of attempting an enumeration that would not terminate
    in reasonable time or memory."""


def brute_force_grid(
    tables: list[BreakpointTable], budget: float, alpha_t: int, rho: float = 0.0
) -> tuple[float, BidVector]:
    """Exhaustive maximum of the summed option scores over the budget grid.

    Enumerates every grid-index tuple with index sum within the budget and
    keeps the lexicographically smallest maximizer. Values are accumulated
    option-by-option in the same left-to-right order as the dynamic program,
    so exact optima agree bitwise, not merely within tolerance.
    """
    num_options = len(tables)
    if (alpha_t + 1) ** num_options > GRID_ENUMERATION_LIMIT:
        raise EnumerationGuardError(
            f"grid enumeration of ({alpha_t + 1})**{num_options} points refused"
        )
    grid_values = np.arange(alpha_t + 1) * (budget / alpha_t)
    # Scalar lookups on purpose: this path must not share the DP's vectorized
    # sweep, only the moment-combination formula.
    per_option = [
        np.array([tb.mean_var_payoff(float(x), rho) for x in grid_values])
        for tb in tables
    ]

    total = None
    index_sum = None
    for k, scores in enumerate(per_option):
        shape = [1] * num_options
        shape[k] = alpha_t + 1
        scores = scores.reshape(shape)
        idx = np.arange(alpha_t + 1).reshape(shape)
        total = scores if total is None else total + scores
        index_sum = idx if index_sum is None else index_sum + idx
    feasible = index_sum <= alpha_t
    masked = np.where(feasible, total, -np.inf)
    flat = int(np.argmax(masked))  # first max in C order = lexicographic min
    best_idx = np.unravel_index(flat, masked.shape)
    value = float(masked.flat[flat])
    bid = BidVector(np.array(best_idx, dtype=float) * (budget / alpha_t), budget)
    return value, bid


@dataclass
class MckpInstance:
    """Multiple-choice knapsack: pick at most one breakpoint per option.

    Item weights are observed translated day-ahead prices and item values the
    running average payoff at that breakpoint; skipping a group is the zero
    bid. Weights/values are exact rationals so ties compare exactly.
    """

    groups: list[list[tuple[Fraction, Fraction]]]
    capacity: Fraction


def mckp_build(tables: list[BreakpointTable], budget: float) -> MckpInstance:
    """Map breakpoint tables onto a knapsack instance (sentinel excluded)."""
    groups = []
    for table in tables:
        lam = table.breakpoints
        r = table.avg
        groups.append(
            [(Fraction(float(lam[j])), Fraction(float(r[j]))) for j in range(1, table.size)]
        )
    return MckpInstance(groups=groups, capacity=Fraction(float(budget)))


@dataclass
class MckpSolution:
    value: Fraction
    total_weight: Fraction
    selection: list[int | None]  # item index per group, None = no bid

    def bids(self, instance: MckpInstance) -> list[Fraction]:
        return [
            instance.groups[k][i][0] if i is not None else Fraction(0)
            for k, i in enumerate(self.selection)
        ]


def mckp_solve_exact(instance: MckpInstance) -> MckpSolution:
    """Depth-first branch and bound, exact in rational arithmetic.

    The bound for a partial assignment adds each remaining group's best
    nonnegative item value while ignoring capacity, which is admissible.
    Ties resolve to smaller total weight, then lexicographically smaller bid
    vectors, matching the grid oracle's preference for cheaper optima.
    """
    num_items = sum(len(g) for g in instance.groups)
    if num_items > MCKP_ITEM_LIMIT:
        raise EnumerationGuardError(f"{num_items} knapsack items exceed the exact-solve guard")

    suffix_bound = [Fraction(0)] * (len(instance.groups) + 1)
    for k in range(len(instance.groups) - 1, -1, -1):
        best_item = max((v for _, v in instance.groups[k]), default=Fraction(0))
        suffix_bound[k] = suffix_bound[k + 1] + max(best_item, Fraction(0))

    best = MckpSolution(
        value=Fraction(0),
        total_weight=Fraction(0),
        selection=[None] * len(instance.groups),
    )
    zero = Fraction(0)

    def better(value, weight, bids_partial) -> bool:
        if value != best.value:
            return value > best.value
        if weight != best.total_weight:
            return weight < best.total_weight
        return bids_partial < best.bids(instance)

    def dfs(k: int, value: Fraction, weight: Fraction, chosen: list[int | None]):
        nonlocal best
        if value + suffix_bound[k] < best.value:
            return
        if k == len(instance.groups):
            bids_here = [
                instance.groups[g][i][0] if i is not None else zero
                for g, i in enumerate(chosen)
            ]
            if better(value, weight, bids_here):
                best = MckpSolution(value=value, total_weight=weight, selection=list(chosen))
            return
        chosen.append(None)
        dfs(k + 1, value, weight, chosen)
        chosen.pop()
        for i, (w, v) in enumerate(instance.groups[k]):
            if weight + w <= instance.capacity:
                chosen.append(i)
                dfs(k + 1, value + v, weight + w, chosen)
                chosen.pop()

    dfs(0, Fraction(0), Fraction(0), [])
    return best


def erm_breakpoint_optimum(tables: list[BreakpointTable], budget: float) -> Fraction:
    """Continuous empirical-average optimum by direct enumeration.

    The summed average-payoff objective is piecewise constant with right-open
    segments, so its continuous supremum over the budget set is attained on
    breakpoint combinations (rounding any feasible bid down to breakpoints
    keeps the value and frees budget). Enumerates the full product in exact
    rationals; independent of the knapsack search above.
    """
    combos = 1
    for table in tables:
        combos *= table.size
    if combos > GRID_ENUMERATION_LIMIT:
        raise EnumerationGuardError(f"{combos} breakpoint combinations refused")

    cap = Fraction(float(budget))
    per_option = [
        [
            (Fraction(float(table.breakpoints[j])), Fraction(float(table.avg[j])))
            for j in range(table.size)
        ]
        for table in tables
    ]
    best = None
    for combo in itertools.product(*per_option):
        weight = sum((w for w, _ in combo), start=Fraction(0))
        if weight > cap:
            continue
        value = sum((v for _, v in combo), start=Fraction(0))
        if best is None or value > best:
            best = value
    assert best is not None  # the all-sentinel combination is always feasible
    return best


def erm_equivalence_check(tables: list[BreakpointTable], budget: float) -> bool:
    """True iff the knapsack optimum equals the enumerated continuous
    empirical-average optimum, compared exactly."""
    return mckp_solve_exact(mckp_build(tables, budget)).value == erm_breakpoint_optimum(
        tables, budget
    )


@dataclass(frozen=True)
class Optimum:
    """A distribution-aware optimal bid and its objective value."""

    bid: np.ndarray
    value: float


def _uniform_bernoulli_optimum(
    model: UniformBernoulliModel, budget: float, rho: float
) -> Optimum:
    hi = min(budget, model.lam_high)
    candidates = [0.0, hi]
    if rho == 0.0:
        if model.lam_low < model.pi_bar < hi:
            candidates.append(model.pi_bar)
    else:
        # Interior stationary points of the mean-variance objective: it is a
        # polynomial in the bid on [lam_low, lam_high], so take the real
        # roots of its derivative.
        poly = np.polynomial.Polynomial
        a, pbar, e = model.lam_low, model.pi_bar, model.eps
        r = poly([a * a / 2 - pbar * a, pbar, -0.5]) / e
        ey2 = poly([-pbar * a + pbar * a * a - a**3 / 3, pbar, -pbar, 1.0 / 3.0]) / e
        objective = r - rho * (ey2 - r * r)
        for root in objective.deriv().roots():
            if abs(root.imag) < 1e-12 and model.lam_low < root.real < hi:
                candidates.append(float(root.real))
    best_x, best_v = 0.0, -np.inf
    for x in sorted(candidates):
        v = model.mean_variance_value(np.array([x]), rho)
        if v > best_v:  # strict: ties keep the smallest bid
            best_x, best_v = x, v
    return Optimum(bid=np.array([best_x]), value=best_v)


def _uniform_spread_optimum(model: UniformSpreadModel, budget: float, rho: float) -> Optimum:
    if rho != 0.0:
        raise UnsupportedModelError(
            "closed-form optimum for the uniform-spread family covers rho=0 only"
        )
    k_all = model.num_options
    if k_all > SPREAD_SUBSET_LIMIT:
        raise EnumerationGuardError(f"{k_all} options exceed the subset-enumeration guard")
    lows = np.array(model.lows)
    widths = np.array(model.highs) - lows
    spreads = np.array(model.spreads)
    positive = [k for k in range(k_all) if spreads[k] > 0]

    best_bid = np.zeros(k_all)
    best_value = 0.0
    for size in range(1, len(positive) + 1):
        for subset in itertools.combinations(positive, size):
            remaining = budget - lows[list(subset)].sum()
            if remaining <= 0:
                continue
            # Within an active subset the objective is linear in the amount
            # bid above each option's support floor, so fill by slope.
            order = sorted(subset, key=lambda k: -(spreads[k] / widths[k]))
            bid = np.zeros(k_all)
            bid[list(subset)] = lows[list(subset)]
            value = 0.0
            for k in order:
                y = min(widths[k], remaining)
                bid[k] += y
                value += spreads[k] * y / widths[k]
                remaining -= y
                if remaining <= 0:
                    break
            if value > best_value:  # strict: ties keep the earlier, smaller subset
                best_value = value
                best_bid = bid
    return Optimum(bid=best_bid, value=best_value)


def analytic_optimum(model, budget: float, rho: float = 0.0) -> Optimum:
    """Exact distribution-aware optimum for a supported synthetic model."""
    if isinstance(model, UniformBernoulliModel):
        return _uniform_bernoulli_optimum(model, budget, rho)
    if isinstance(model, UniformSpreadModel):
        return _uniform_spread_optimum(model, budget, rho)
    raise UnsupportedModelError(f"no closed-form optimum for {type(model).__name__}")
