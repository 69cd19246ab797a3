"""Comparison bidding policies: greedy spread-ranking, Kiefer-Wolfowitz
stochastic approximation, and an SVM-ranked greedy bidder, all behind the
same observe/next_bid interface as the dynamic-programming policy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market_model import BidVector


@dataclass(frozen=True)
class SaConfig:
    """Step sizes for the stochastic-approximation policy.

    The gradient step for day t+1 is ``a / (t-1)`` and the two-sided
    perturbation half-width is ``c / (t-1)**0.25``.
    """

    a: float = 20000.0
    c: float = 2000.0

    def __post_init__(self):
        if self.a <= 0 or self.c <= 0:
            raise ValueError("step-size numerators must be positive")

    def step_size(self, t: int) -> float:
        return self.a / (t - 1)

    def perturbation(self, t: int) -> float:
        return self.c / (t - 1) ** 0.25


@dataclass(frozen=True)
class SvmGrConfig:
    lookback_days: int = 6
    confidence: float = 0.95
    training_span: int = 365
    reg: float = 1e-4
    epochs: int = 40

    def __post_init__(self):
        if self.lookback_days < 1:
            raise ValueError("lookback_days must be >= 1")
        if not 0 < self.confidence < 1:
            raise ValueError("confidence must be in (0, 1)")


def project_to_feasible(x: np.ndarray, budget: float) -> np.ndarray:
    """Euclidean projection onto {y >= 0, sum(y) <= budget}.

    Clamp negatives first; if the clamped vector already fits the budget it
    is the projection. Otherwise apply the standard sort-based simplex
    threshold: subtract the uniform shift tau solving sum(max(x - tau, 0)) =
    budget and clamp at zero. O(K log K), deterministic.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    x = np.asarray(x, dtype=float)
    clamped = np.maximum(x, 0.0)
    if clamped.sum() <= budget:
        return clamped
    u = np.sort(x)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, x.size + 1)
    rho = int(np.nonzero(u - (css - budget) / j > 0)[0].max())
    tau = (css[rho] - budget) / (rho + 1)
    return np.maximum(x - tau, 0.0)


def _greedy_allocate(order: np.ndarray, levels: np.ndarray, budget: float) -> np.ndarray:
    """Shared greedy loop: walk options in ranked order, bid each at its
    level if the remaining budget covers it, otherwise skip and keep trying
    cheaper candidates further down the list."""
    bids = np.zeros(levels.size)
    remaining = budget
    for k in order:
        level = levels[k]
        if level <= 0.0:
            continue
        if level > remaining:
            continue
        bids[k] = level
        remaining -= level
        if remaining <= 0.0:
            break
    return bids


def ucbid_gr_step(
    avg_spread: np.ndarray, avg_rt: np.ndarray, budget: float
) -> BidVector:
    """Greedy profitability-ranked bids at historical average prices.

    Options are sorted by historical average spread (rt - da, descending);
    each profitable option (positive average spread) is bid at its historical
    average real-time price, clamped at zero (a nonpositive average price
    means "do not bid"). Unaffordable options are skipped and cheaper ones
    further down the ranking still get a chance.
    """
    avg_spread = np.asarray(avg_spread, dtype=float)
    avg_rt = np.asarray(avg_rt, dtype=float)
    order = np.argsort(-avg_spread, kind="stable")
    levels = np.where(avg_spread > 0.0, np.maximum(avg_rt, 0.0), 0.0)
    return BidVector(_greedy_allocate(order, levels, budget), budget)


def sa_step(
    x: np.ndarray,
    lam: np.ndarray,
    pi: np.ndarray,
    t: int,
    cfg: SaConfig,
    budget: float,
) -> np.ndarray:
    """One Kiefer-Wolfowitz update from the lagged observation (lam, pi).

    The finite-difference gradient estimate per option is
    ``[1{x + c_t >= lam} - 1{x - c_t >= lam}] / c_t``; the bid moves by
    ``a_t * (pi - lam)`` along it and the whole vector is projected back
    onto the feasible set. For t < 2 the step sizes are undefined and the
    bid is returned unchanged.
    """
    x = np.asarray(x, dtype=float)
    if t < 2:
        return x.copy()
    a_t = cfg.step_size(t)
    c_t = cfg.perturbation(t)
    grad = ((x + c_t >= lam).astype(float) - (x - c_t >= lam).astype(float)) / c_t
    return project_to_feasible(x + a_t * (pi - lam) * grad, budget)


def train_linear_svm(
    features: np.ndarray,
    labels: np.ndarray,
    reg: float = 1e-4,
    epochs: int = 40,
) -> tuple[np.ndarray, float, bool]:
    """Hinge-loss linear classifier via deterministic subgradient descent.

    Pegasos-style schedule (step 1/(reg * step_count)) over a fixed epoch
    ordering, so retraining on the same data is bitwise reproducible. The
    bias term is unregularized. Returns (weights, bias, degenerate) where
    degenerate flags single-class training labels (the classifier is then
    the constant majority sign).
    """
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=float)
    n, dim = features.shape
    if np.all(labels > 0) or np.all(labels < 0):
        return np.zeros(dim), float(np.sign(labels.sum()) or -1.0), True
    w = np.zeros(dim)
    b = 0.0
    step = 0
    for _ in range(epochs):
        for i in range(n):
            step += 1
            eta = 1.0 / (reg * step)
            margin = labels[i] * (w @ features[i] + b)
            w *= 1.0 - eta * reg
            if margin < 1.0:
                w += eta * labels[i] * features[i]
                b += eta * labels[i] * 0.1  # damped bias step, standard trick
    return w, b, False


@dataclass
class SvmGrModel:
    """Per-option artifacts from a training year."""

    weights: np.ndarray  # (K, lookback*K) stacked per-option classifiers
    biases: np.ndarray
    avg_profit: np.ndarray
    bid_level: np.ndarray
    degenerate: np.ndarray  # bool per option
    lookback_days: int

    def predict_profitable(self, window: np.ndarray) -> np.ndarray:
        feats = window.reshape(-1)
        scores = self.weights @ feats + self.biases
        return scores > 0.0


def _training_windows(spreads: np.ndarray, lookback: int) -> tuple[np.ndarray, np.ndarray]:
    """Feature matrix and day indices for in-sample window classification.

    Day d's features are the all-option spreads of days d-lookback-1 .. d-2,
    mirroring the two-day observation lag used when bidding live.
    """
    num_days = spreads.shape[0]
    first = lookback + 1
    days = np.arange(first, num_days)
    feats = np.stack([spreads[d - lookback - 1 : d - 1].reshape(-1) for d in days])
    return feats, days


def svm_gr_train(spreads: np.ndarray, da_prices: np.ndarray, cfg: SvmGrConfig) -> SvmGrModel:
    """Fit the per-option direction classifiers and greedy-ranking stats.

    ``spreads`` and ``da_prices`` are (days, K) translated training arrays.
    Per option: a linear classifier predicts whether the option's own spread
    will be positive from the recent all-option spread window; the average
    profit used for ranking is the mean absolute spread over training days
    the classifier calls profitable; the bid level is the empirical
    ``confidence`` quantile of the option's translated day-ahead price.
    """
    spreads = np.asarray(spreads, dtype=float)
    da_prices = np.asarray(da_prices, dtype=float)
    num_days, num_options = spreads.shape
    if num_days < cfg.lookback_days + 2:
        raise ValueError(
            f"training span must cover at least {cfg.lookback_days + 2} days"
        )
    feats, days = _training_windows(spreads, cfg.lookback_days)
    dim = feats.shape[1]
    weights = np.zeros((num_options, dim))
    biases = np.zeros(num_options)
    avg_profit = np.zeros(num_options)
    bid_level = np.zeros(num_options)
    degenerate = np.zeros(num_options, dtype=bool)
    for k in range(num_options):
        labels = np.where(spreads[days, k] > 0.0, 1.0, -1.0)
        w, b, degen = train_linear_svm(feats, labels, reg=cfg.reg, epochs=cfg.epochs)
        weights[k] = w
        biases[k] = b
        degenerate[k] = degen
        predicted = feats @ w + b > 0.0
        if predicted.any():
            avg_profit[k] = np.abs(spreads[days, k])[predicted].mean()
        bid_level[k] = np.quantile(da_prices[:, k], cfg.confidence)
    return SvmGrModel(
        weights=weights,
        biases=biases,
        avg_profit=avg_profit,
        bid_level=bid_level,
        degenerate=degenerate,
        lookback_days=cfg.lookback_days,
    )


def svm_gr_step(model: SvmGrModel, window: np.ndarray, budget: float) -> BidVector:
    """Greedy bids at the trained acceptance levels, ranked by avg profit.

    ``window`` holds the most recent visible spreads, shape (lookback, K).
    A short window (not enough history yet) yields the zero bid.
    """
    window = np.asarray(window, dtype=float)
    if window.shape[0] < model.lookback_days:
        return BidVector.zero(model.avg_profit.size, budget)
    profitable = model.predict_profitable(window[-model.lookback_days :])
    order = np.argsort(-model.avg_profit, kind="stable")
    levels = np.where(profitable, model.bid_level, 0.0)
    return BidVector(_greedy_allocate(order, levels, budget), budget)


class UcbidGrPolicy:
    """Greedy historical-average policy behind the shared interface."""

    name = "ucbid-gr"

    def __init__(self, num_options: int, budget: float):
        self.num_options = num_options
        self.budget = budget
        self.days = 0
        self._spread_sum = np.zeros(num_options)
        self._rt_sum = np.zeros(num_options)

    def observe(self, da: np.ndarray, rt: np.ndarray) -> None:
        self._spread_sum += np.asarray(rt) - np.asarray(da)
        self._rt_sum += np.asarray(rt)
        self.days += 1

    def next_bid(self) -> BidVector:
        if self.days == 0:
            return BidVector.zero(self.num_options, self.budget)
        return ucbid_gr_step(
            self._spread_sum / self.days, self._rt_sum / self.days, self.budget
        )


class SaPolicy:
    """Kiefer-Wolfowitz stochastic approximation on the latest observation."""

    def __init__(self, num_options: int, budget: float, cfg: SaConfig | None = None):
        self.num_options = num_options
        self.budget = budget
        self.cfg = cfg or SaConfig()
        self._x = np.zeros(num_options)
        self._last_obs: tuple[np.ndarray, np.ndarray] | None = None
        self._day = 0

    @property
    def name(self) -> str:
        return "sa"

    def observe(self, da: np.ndarray, rt: np.ndarray) -> None:
        self._last_obs = (np.asarray(da, dtype=float), np.asarray(rt, dtype=float))

    def next_bid(self) -> BidVector:
        self._day += 1
        if self._day > 1 and self._last_obs is not None:
            lam, pi = self._last_obs
            self._x = sa_step(self._x, lam, pi, self._day, self.cfg, self.budget)
        return BidVector(self._x.copy(), self.budget)


class SvmGrPolicy:
    """SVM-ranked greedy policy; trains once when its warmup span ends."""

    name = "svm-gr"

    def __init__(self, num_options: int, budget: float, cfg: SvmGrConfig | None = None):
        self.num_options = num_options
        self.budget = budget
        self.cfg = cfg or SvmGrConfig()
        self._spreads: list[np.ndarray] = []
        self._da: list[np.ndarray] = []
        self.model: SvmGrModel | None = None

    def observe(self, da: np.ndarray, rt: np.ndarray) -> None:
        da = np.asarray(da, dtype=float)
        self._spreads.append(np.asarray(rt, dtype=float) - da)
        self._da.append(da)

    def on_warmup_end(self) -> None:
        """Train on the trailing training_span days observed during warmup."""
        if len(self._spreads) >= self.cfg.lookback_days + 2:
            span = self.cfg.training_span
            self.model = svm_gr_train(
                np.stack(self._spreads[-span:]), np.stack(self._da[-span:]), self.cfg
            )

    def next_bid(self) -> BidVector:
        if self.model is None:
            return BidVector.zero(self.num_options, self.budget)
        window = np.stack(self._spreads[-self.cfg.lookback_days :])
        return svm_gr_step(self.model, window, self.budget)
