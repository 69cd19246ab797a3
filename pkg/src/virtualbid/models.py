"""Synthetic i.i.d. market price models with closed-form payoff moments.

Each model samples translated (da, rt) price days and can evaluate the exact
expected payoff, payoff second moment, and mean-variance objective of any
bid, which is what lets the regret harness score submitted bids analytically
instead of averaging realized payoffs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market_model import MarketDay


class UnsupportedModelError(ValueError):
    """Raised when a closed-form quantity is requested from a model/config
    combination that does not support it."""


@dataclass(frozen=True)
class UniformBernoulliModel:
    """Single option: da uniform on [mid - eps/2, mid + eps/2], rt in {0, 1}.

    ``drift`` is E[rt] - mid, so the expected spread of an always-clearing
    bid is exactly ``drift``. The adversarial pair used for lower-bound
    experiments is this model with drift = -eps_and +eps respectively.
    """

    eps: float
    drift: float
    mid: float = 0.5

    def __post_init__(self):
        if not 0 < self.eps:
            raise ValueError("eps must be positive")
        pi_bar = self.mid + self.drift
        if not 0 <= pi_bar <= 1:
            raise ValueError("E[rt] must lie in [0, 1] for a Bernoulli rt")

    @property
    def num_options(self) -> int:
        return 1

    @property
    def pi_bar(self) -> float:
        return self.mid + self.drift

    @property
    def lam_low(self) -> float:
        return self.mid - self.eps / 2

    @property
    def lam_high(self) -> float:
        return self.mid + self.eps / 2

    satisfies_assumptions = True

    def sample_day(self, rng: np.random.Generator) -> MarketDay:
        lam = rng.uniform(self.lam_low, self.lam_high)
        pi = 1.0 if rng.random() < self.pi_bar else 0.0
        return MarketDay(np.array([lam]), np.array([pi]))

    def _clear_fraction(self, x: float) -> float:
        if x <= self.lam_low:
            return 0.0
        if x >= self.lam_high:
            return 1.0
        return (x - self.lam_low) / self.eps

    def expected_payoff(self, x: float) -> float:
        """E[(rt - da) * 1{x >= da}] for a single fixed bid x.

        On the interior this is the integral of (pi_bar - lam) over
        lam in [lam_low, x] against the uniform density 1/eps.
        """
        if x <= self.lam_low:
            return 0.0
        if x >= self.lam_high:
            return self.drift
        u = x - self.lam_low
        return (u / self.eps) * (self.pi_bar - self.lam_low - u / 2)

    def payoff_second_moment(self, x: float) -> float:
        """E[((rt - da) * 1{x >= da})**2]; rt**2 == rt for Bernoulli rt."""
        x = min(max(x, self.lam_low), self.lam_high)
        a = self.lam_low
        frac = (x - a) / self.eps
        m1 = (x * x - a * a) / (2 * self.eps)
        m2 = (x**3 - a**3) / (3 * self.eps)
        return self.pi_bar * frac - 2 * self.pi_bar * m1 + m2

    def payoff_variance(self, x: float) -> float:
        r = self.expected_payoff(x)
        return self.payoff_second_moment(x) - r * r

    def mean_variance_value(self, bid: np.ndarray, rho: float) -> float:
        x = float(np.asarray(bid).reshape(-1)[0])
        if rho == 0.0:
            return self.expected_payoff(x)
        return self.expected_payoff(x) - rho * self.payoff_variance(x)


@dataclass(frozen=True)
class UniformSpreadModel:
    """Independent options: da uniform per option, rt = da + fixed spread.

    The conditional mean spread is constant (the rt price tracks the da
    price exactly plus ``spreads[k]``), so the expected payoff of a bid is
    spread times clearing probability, piecewise linear per option.
    """

    lows: tuple[float, ...]
    highs: tuple[float, ...]
    spreads: tuple[float, ...]

    def __post_init__(self):
        if not len(self.lows) == len(self.highs) == len(self.spreads):
            raise ValueError("lows, highs, spreads must have equal length")
        for lo, hi in zip(self.lows, self.highs):
            if not 0 <= lo < hi:
                raise ValueError("need 0 <= low < high per option")

    @property
    def num_options(self) -> int:
        return len(self.lows)

    satisfies_assumptions = True

    def sample_day(self, rng: np.random.Generator) -> MarketDay:
        lam = rng.uniform(np.array(self.lows), np.array(self.highs))
        return MarketDay(lam, lam + np.array(self.spreads))

    def _clear_fractions(self, bid: np.ndarray) -> np.ndarray:
        lo = np.array(self.lows)
        hi = np.array(self.highs)
        return np.clip((np.asarray(bid) - lo) / (hi - lo), 0.0, 1.0)

    def expected_payoff(self, bid: np.ndarray) -> float:
        frac = self._clear_fractions(bid)
        return float((np.array(self.spreads) * frac).sum())

    def mean_variance_value(self, bid: np.ndarray, rho: float) -> float:
        s = np.array(self.spreads)
        frac = self._clear_fractions(bid)
        value = s * frac
        if rho != 0.0:
            value = value - rho * (s * s) * frac * (1.0 - frac)
        return float(value.sum())


PriceModel = UniformBernoulliModel | UniformSpreadModel
