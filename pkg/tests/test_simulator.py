import math

import numpy as np
import pytest

from virtualbid.dpds import DpdsPolicy, GridSchedule
from virtualbid.models import UniformBernoulliModel, UnsupportedModelError
from virtualbid.policies import ConstantPolicy, OraclePolicy, ZeroPolicy
from virtualbid.simulator import (
    lower_bound_family,
    replication_rng,
    run_experiment,
    sample_day,
    slope_check,
    write_trajectory_csv,
)


def test_sample_day_supports_of_the_adversarial_family():
    f1, f2, eps = lower_bound_family(100)
    assert eps == pytest.approx(100**-0.5 / (2 * math.sqrt(5)), abs=1e-15)
    rng = replication_rng(0, 0)
    for _ in range(200):
        day = sample_day(f2, rng)
        assert (1 - eps) / 2 <= day.da[0] <= (1 + eps) / 2
        assert day.rt[0] in (0.0, 1.0)


def test_sample_day_deterministic_given_seed():
    f1, _, _ = lower_bound_family(50)
    days_a = [sample_day(f1, replication_rng(9, 1)).da[0] for _ in range(1)]
    days_b = [sample_day(f1, replication_rng(9, 1)).da[0] for _ in range(1)]
    assert days_a == days_b
    stream_a = [sample_day(f1, rng).da[0] for rng in [replication_rng(9, 1)] for _ in range(5)]
    rng = replication_rng(9, 1)
    stream_b = [sample_day(f1, rng).da[0] for _ in range(5)]
    assert stream_a[0] == stream_b[0]


def test_sample_mean_of_rt_price_matches_bernoulli():
    f0 = UniformBernoulliModel(eps=0.1, drift=0.0)
    rng = replication_rng(7, 0)
    draws = np.array([sample_day(f0, rng).rt[0] for _ in range(10**5)])
    assert abs(draws.mean() - 0.5) < 0.005


def test_lower_bound_family_eps_values():
    _, _, eps_2000 = lower_bound_family(2000)
    assert eps_2000 == pytest.approx(2000**-0.5 / (2 * math.sqrt(5)), abs=1e-15)
    _, _, eps_1 = lower_bound_family(1)
    assert eps_1 == pytest.approx(1 / (2 * math.sqrt(5)), abs=1e-15)
    assert eps_1 == pytest.approx(0.2236, abs=5e-5)


def test_lower_bound_models_pay_zero_at_zero_bid():
    f1, f2, _ = lower_bound_family(500)
    assert f1.expected_payoff(0.0) == 0.0
    assert f2.expected_payoff(0.0) == 0.0


def test_zero_policy_regret_is_horizon_times_eps():
    _, f2, eps = lower_bound_family(400)
    T = 50
    traj = run_experiment(ZeroPolicy, f2, T=T, replications=3, seed=1)
    assert traj.cumulative[-1] == pytest.approx(T * eps, abs=1e-12)
    assert np.allclose(traj.inc_mean, eps, atol=1e-15)


def test_oracle_policy_has_zero_regret():
    _, f2, eps = lower_bound_family(400)

    def factory(num_options, budget):
        return OraclePolicy(num_options, budget, np.array([(1 + eps) / 2]))

    traj = run_experiment(factory, f2, T=40, replications=2, seed=0)
    assert np.allclose(traj.cumulative, 0.0, atol=1e-12)


def test_regret_is_nonnegative_for_any_policy():
    f0 = UniformBernoulliModel(eps=0.2, drift=0.0)

    def factory(num_options, budget):
        return ConstantPolicy(num_options, budget, 0.47)

    traj = run_experiment(factory, f0, T=30, replications=2, seed=3)
    assert (traj.inc_mean >= -1e-12).all()
    assert (np.diff(traj.cumulative) >= -1e-12).all()


def test_dpds_per_day_regret_shrinks():
    model = UniformBernoulliModel(eps=0.1, drift=0.1)

    def factory(num_options, budget):
        return DpdsPolicy(num_options, budget, GridSchedule(1.0, 0.5))

    traj = run_experiment(factory, model, T=400, replications=5, seed=11)
    assert traj.cumulative[-1] > 0
    early = traj.inc_mean[:50].mean()
    late = traj.inc_mean[-50:].mean()
    assert late < early


def test_run_experiment_reproducible_bitwise():
    model = UniformBernoulliModel(eps=0.1, drift=0.05)

    def factory(num_options, budget):
        return DpdsPolicy(num_options, budget)

    a = run_experiment(factory, model, T=60, replications=3, seed=21)
    b = run_experiment(factory, model, T=60, replications=3, seed=21)
    assert np.array_equal(a.inc_mean, b.inc_mean)
    assert np.array_equal(a.stderr, b.stderr)


def test_thread_count_does_not_change_results():
    model = UniformBernoulliModel(eps=0.1, drift=0.05)

    def factory(num_options, budget):
        return DpdsPolicy(num_options, budget)

    serial = run_experiment(factory, model, T=40, replications=4, seed=5, threads=1)
    parallel = run_experiment(factory, model, T=40, replications=4, seed=5, threads=4)
    assert np.array_equal(serial.inc_mean, parallel.inc_mean)


def test_run_experiment_refuses_unsupported_model_without_reference():
    class Opaque:
        num_options = 1

        def sample_day(self, rng):
            raise NotImplementedError

        def mean_variance_value(self, bid, rho):
            return 0.0

    with pytest.raises(UnsupportedModelError):
        run_experiment(ZeroPolicy, Opaque(), T=5, replications=1)


def test_slope_check_shapes_and_refusals():
    with pytest.raises(ValueError):
        slope_check([100, 200], [1.0, 2.0])
    with pytest.raises(ValueError):
        slope_check([100, 200, 400], [1.0, 2.0, 3.0])
    ratios = slope_check([100, 1000, 10000], [0.0, 0.0, 0.0])
    assert ratios.tolist() == [0.0, 0.0, 0.0]


def test_slope_check_linear_regret_grows_like_sqrt_t_over_log():
    horizons = [100, 1000, 10000]
    per_day = 0.25
    ratios = slope_check(horizons, [per_day * T for T in horizons])
    expected = [per_day * math.sqrt(T / math.log(T)) for T in horizons]
    assert np.allclose(ratios, expected, rtol=1e-12)
    assert ratios[2] > ratios[1] > ratios[0]


def test_lower_bound_sanity_for_constant_half_bidder():
    T = 400
    f1, f2, eps = lower_bound_family(T)

    def factory(num_options, budget):
        return ConstantPolicy(num_options, budget, 0.5)

    r1 = run_experiment(factory, f1, T=T, replications=1, seed=0).cumulative[-1]
    r2 = run_experiment(factory, f2, T=T, replications=1, seed=0).cumulative[-1]
    # Bidding the midpoint loses 3*eps/8 per day under both models, with no
    # slack against the constructed bound.
    assert r1 == pytest.approx(T * 3 * eps / 8, rel=1e-9)
    assert r2 == pytest.approx(T * 3 * eps / 8, rel=1e-9)
    bound = math.sqrt(T) / (16 * math.sqrt(5))
    assert r1 + r2 >= 2 * bound


def test_multi_option_experiment_with_learning_and_greedy_policies():
    from virtualbid.benchmarks import UcbidGrPolicy
    from virtualbid.models import UniformSpreadModel

    model = UniformSpreadModel(
        lows=(0.1, 0.3, 0.2), highs=(0.6, 0.9, 0.8), spreads=(0.25, -0.1, 0.15)
    )
    budget = 1.2

    def dp_factory(num_options, b):
        return DpdsPolicy(num_options, b, GridSchedule(1.0, 0.5))

    for factory in (dp_factory, UcbidGrPolicy):
        traj = run_experiment(factory, model, T=300, replications=3, budget=budget, seed=4)
        assert (traj.inc_mean >= -1e-12).all()
    dp_traj = run_experiment(dp_factory, model, T=300, replications=3, budget=budget, seed=4)
    assert dp_traj.inc_mean[-40:].mean() < dp_traj.inc_mean[:40].mean()


def test_trajectory_csv_format(tmp_path):
    _, f2, _ = lower_bound_family(100)
    traj = run_experiment(ZeroPolicy, f2, T=5, replications=2, seed=0)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "day,mean_incremental_regret,cumulative_regret,stderr"
    assert len(lines) == 6
    assert lines[1].startswith("1,")
