"""Per-option empirical payoff statistics on a growing breakpoint table.

The average payoff of a fixed bid over the observed history is piecewise
constant in the bid, with one breakpoint per observed day-ahead price. Each
option keeps three parallel arrays: sorted observed prices with a leading
sentinel 0, the running average payoff at each breakpoint, and the running
average squared payoff (needed for the sample mean-variance objective). All
three are maintained incrementally in O(t) per observation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

_INITIAL_CAPACITY = 8


@dataclass(frozen=True)
class PayoffBounds:
    """Support bounds [l, u] of the single-day payoff random variable."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (self.lower <= 0.0 <= self.upper):
            raise ValueError("payoff support must contain 0 (a zero bid pays 0)")


def mean_variance_combine(rbar, vbar, t: int, rho: float):
    """Sample mean-variance score from running first/second payoff moments.

    Computes ``rbar + rho * (t / (t - 1)) * (rbar**2 - vbar)``, which equals
    the average payoff minus ``rho`` times the sample variance (with t-1
    denominator) of the cleared payoffs. For t < 2 the variance term is
    defined as 0 so risk-averse policies degrade to risk-neutral on day one.

    Accepts scalars or numpy arrays; both the grid sweep and the scalar
    lookup must go through this single expression so their floats agree
    bitwise.
    """
    if rho < 0:
        raise ValueError("risk weight rho must be nonnegative")
    if rho == 0.0 or t < 2:
        return rbar
    return rbar + rho * (t / (t - 1)) * (rbar * rbar - vbar)


class BreakpointTable:
    """Running piecewise-constant payoff statistics for one option."""

    __slots__ = ("_lam", "_r", "_v", "_n", "t")

    def __init__(self):
        self._lam = np.zeros(_INITIAL_CAPACITY)
        self._r = np.zeros(_INITIAL_CAPACITY)
        self._v = np.zeros(_INITIAL_CAPACITY)
        self._n = 1  # sentinel breakpoint at 0
        self.t = 0

    @property
    def size(self) -> int:
        """Number of table entries, sentinel included (t + 1)."""
        return self._n

    @property
    def breakpoints(self) -> np.ndarray:
        return self._lam[: self._n]

    @property
    def avg(self) -> np.ndarray:
        return self._r[: self._n]

    @property
    def avg_sq(self) -> np.ndarray:
        return self._v[: self._n]

    def _grow(self):
        cap = 2 * self._lam.size
        for name in ("_lam", "_r", "_v"):
            new = np.zeros(cap)
            new[: self._n] = getattr(self, name)[: self._n]
            setattr(self, name, new)

    def update(self, lam_obs: float, pi_obs: float) -> None:
        """Fold in one observed (day-ahead, real-time) price pair.

        The new price is inserted after all strictly smaller breakpoints
        (duplicates get their own entry). Every entry whose breakpoint is
        >= the new price would have cleared the new day, so it is rescaled
        and receives the day's payoff; entries below are rescaled only.
        The inserted entry starts from the running average of the last
        breakpoint <= the new price, which keeps duplicate runs equal to the
        batch recomputation entry-by-entry, not just at query time.
        """
        n = self._n
        if n == self._lam.size:
            self._grow()
        payoff = pi_obs - lam_obs
        t_new = self.t + 1
        scale = self.t / t_new
        add_r = payoff / t_new
        add_v = (payoff * payoff) / t_new

        lam, r, v = self._lam, self._r, self._v
        # Translated prices at or below 0 (boundary or out-of-contract data)
        # clamp to 0: any positive bid clears them, the zero bid never does.
        lam_eff = max(lam_obs, 0.0)
        p = max(int(np.searchsorted(lam[:n], lam_eff, side="left")), 1)
        q = int(np.searchsorted(lam[:n], lam_eff, side="right")) - 1
        new_r = scale * r[q] + add_r
        new_v = scale * v[q] + add_v

        lam[p + 1 : n + 1] = lam[p:n]
        r[p + 1 : n + 1] = r[p:n]
        v[p + 1 : n + 1] = v[p:n]
        lam[p] = lam_eff
        r[p] = new_r
        v[p] = new_v
        r[1:p] *= scale
        v[1:p] *= scale
        r[p + 1 : n + 1] *= scale
        r[p + 1 : n + 1] += add_r
        v[p + 1 : n + 1] *= scale
        v[p + 1 : n + 1] += add_v

        self._n = n + 1
        self.t = t_new

    def segment_index(self, x: float) -> int:
        """Index of the last breakpoint <= x (the segment containing bid x).

        Bids <= 0 always land on the sentinel: a zero bid means "not bidding"
        even when the table holds breakpoints at exactly 0.
        """
        if x <= 0.0:
            return 0
        return max(int(np.searchsorted(self._lam[: self._n], x, side="right")) - 1, 0)

    def avg_payoff(self, x: float) -> float:
        """Average historical payoff of the fixed bid x (0 when no data)."""
        return float(self._r[self.segment_index(x)])

    def mean_var_payoff(self, x: float, rho: float) -> float:
        """Sample mean-variance score of the fixed bid x."""
        j = self.segment_index(x)
        return float(mean_variance_combine(self._r[j], self._v[j], self.t, rho))

    def stats_at(self, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized (avg, avg_sq, segment index) lookup at bid values xs."""
        idx = np.searchsorted(self._lam[: self._n], xs, side="right") - 1
        np.maximum(idx, 0, out=idx)
        idx[np.asarray(xs) <= 0.0] = 0
        return self._r[idx], self._v[idx], idx

    def validate(self, bounds: PayoffBounds | None = None) -> None:
        """Check structural invariants; raises AssertionError on violation."""
        lam, r, v = self.breakpoints, self.avg, self.avg_sq
        assert lam[0] == 0.0 and r[0] == 0.0 and v[0] == 0.0
        assert self.size == self.t + 1
        assert (np.diff(lam) >= 0).all(), "breakpoints must be nondecreasing"
        assert (v[1:] >= -1e-12).all()
        if bounds is not None:
            assert (r >= bounds.lower - 1e-9).all() and (r <= bounds.upper + 1e-9).all()
            vmax = max(bounds.lower**2, bounds.upper**2)
            assert (v <= vmax + 1e-9).all()

    # -- snapshot support ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "lambda": self.breakpoints.tolist(),
            "r": self.avg.tolist(),
            "v": self.avg_sq.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BreakpointTable":
        table = cls()
        n = len(data["lambda"])
        cap = max(_INITIAL_CAPACITY, n)
        table._lam = np.zeros(cap)
        table._r = np.zeros(cap)
        table._v = np.zeros(cap)
        table._lam[:n] = data["lambda"]
        table._r[:n] = data["r"]
        table._v[:n] = data["v"]
        table._n = n
        table.t = int(data["t"])
        return table


SNAPSHOT_VERSION = 1


def save_tables(tables: list[BreakpointTable], path) -> None:
    """Checkpoint a set of option tables to a versioned JSON snapshot.

    Floats round-trip exactly (JSON uses repr, the shortest exact form), so
    restoring a snapshot reproduces bids bitwise.
    """
    payload = {
        "version": SNAPSHOT_VERSION,
        "tables": [table.to_dict() for table in tables],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_tables(path) -> list[BreakpointTable]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("version") != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {payload.get('version')!r}")
    return [BreakpointTable.from_dict(d) for d in payload["tables"]]


def batch_avg_payoff(observations: list[tuple[float, float]], x: float) -> float:
    """Direct-from-definition average payoff; the oracle for update()."""
    if not observations:
        return 0.0
    total = 0.0
    for lam, pi in observations:
        if x > 0.0 and x >= lam:
            total += pi - lam
    return total / len(observations)


def batch_avg_sq_payoff(observations: list[tuple[float, float]], x: float) -> float:
    """Direct-from-definition average squared payoff."""
    if not observations:
        return 0.0
    total = 0.0
    for lam, pi in observations:
        if x > 0.0 and x >= lam:
            total += (pi - lam) ** 2
    return total / len(observations)
