import json
import math

import numpy as np
import pytest

from smoothbandits.layout import EpochLayout
from smoothbandits.policies import (
    BEConfig,
    BudgetedExploration,
    KArmedBudgetedExploration,
    PolicySpec,
    PolicyStateError,
    TwoArmedBudgetedExploration,
    default_params,
    fixed_arm,
    oracle_policy,
)
from smoothbandits.rewards import BanditInstance, ConstantCurve, PiecewiseCurve
from smoothbandits.piecewise import PiecewisePoly


def drive(policy, rewards_by_round, T):
    """Feed ``rewards_by_round(t, arm)`` back into ``policy`` for rounds 1..T."""
    arms, last = [], None
    for t in range(1, T + 1):
        a = policy.step(t, last)
        arms.append(a)
        last = rewards_by_round(t, a)
    return arms


# -- schedules ----------------------------------------------------------
def test_experiment_schedules():
    c = default_params(2, 2**20)
    assert (c.B, c.Delta) == pytest.approx((256.0, 0.0625))
    c = default_params(1, 2**20)
    assert c.B == pytest.approx(2 ** (20 / 3)) and c.B == pytest.approx(101.59, abs=0.01)
    assert c.Delta == pytest.approx(0.009843, abs=1e-6)


def test_theoretical_schedule_beta2():
    c = default_params(2, 2**20, L=1.0, style="theoretical")
    assert c.Delta == pytest.approx(0.0625 * math.log(2**20) ** 0.2, rel=1e-12)
    assert c.Delta == pytest.approx(0.10575, abs=1e-5)


def test_theoretical_schedule_beta1_depends_on_L():
    a = default_params(1, 2**20, L=1.0, style="theoretical")
    b = default_params(1, 2**20, L=8.0, style="theoretical")
    assert b.Delta == pytest.approx(a.Delta / 4)
    assert b.B == pytest.approx(a.B / 2)


def test_k_armed_schedule():
    T, k = 2**20, 5
    c = default_params(2, T, k=k)
    d = k ** -0.6 * T ** -0.4 * math.log(T) ** 0.2 * math.log(k) ** 0.2
    assert c.Delta == pytest.approx(d)
    assert c.B == pytest.approx(math.sqrt(d * T * math.log(T) * math.log(k) / k))
    assert c.k == k


def test_schedule_errors():
    with pytest.raises(ValueError):
        default_params(1, 8)
    with pytest.raises(ValueError):
        default_params(3, 2**10)
    with pytest.raises(ValueError, match="degenerate"):
        default_params(1, 16, L=1e-6, style="theoretical")
    with pytest.raises(ValueError):
        BEConfig(0.0, 0.1)
    with pytest.raises(ValueError):
        BEConfig(1.0, 1.5)


# -- be1 ----------------------------------------------------------------
def be1(B, T=20, delta=1.0):
    return BudgetedExploration(BEConfig(B, delta), EpochLayout.from_delta(T, delta))


def test_be1_first_round_of_each_epoch_is_arm1():
    pol = be1(1.0, T=12, delta=0.25)
    arms = drive(pol, lambda t, a: -1, 12)
    assert [arms[i] for i in (0, 3, 6, 9)] == [1, 1, 1, 1]


def test_be1_stops_at_minus_B():
    arms = drive(be1(3.0), lambda t, a: -1, 10)
    assert arms == [1, 1, 1] + [0] * 7


def test_be1_partial_sums_example():
    seq = [1, -1, -1, -1]
    arms = drive(be1(2.0), lambda t, a: seq[t - 1] if t <= 4 else 1, 8)
    assert arms == [1, 1, 1, 1, 0, 0, 0, 0]


def test_be1_resets_each_epoch():
    arms = drive(be1(2.0, T=8, delta=0.5), lambda t, a: -1, 8)
    assert arms == [1, 1, 0, 0, 1, 1, 0, 0]


def test_step_order_enforced():
    pol = be1(2.0)
    pol.step(1)
    with pytest.raises(PolicyStateError):
        pol.step(3, 1)
    with pytest.raises(PolicyStateError):
        pol.step(2, None)
    with pytest.raises(PolicyStateError):
        be1(2.0).step(2, None)


def test_be1_budget_beyond_epoch_never_stops():
    arms = drive(be1(50.0, T=40, delta=0.5), lambda t, a: -1, 40)
    assert set(arms) == {1}


# -- be2 ----------------------------------------------------------------
def be2(B, T=20, delta=1.0):
    return TwoArmedBudgetedExploration(BEConfig(B, delta), EpochLayout.from_delta(T, delta))


def test_be2_alternates_from_arm0():
    arms = drive(be2(5.0), lambda t, a: 1, 10)
    assert arms == [0, 1] * 5


def test_be2_strict_trigger():
    # pair differences +2, +2: D = 2 (no), 4 (> 2) -> commit to arm 0
    arms = drive(be2(2.0), lambda t, a: 1 if a == 0 else -1, 10)
    assert arms == [0, 1, 0, 1] + [0] * 6


def test_be2_commits_to_arm1_leader():
    arms = drive(be2(1.0), lambda t, a: 1 if a == 1 else -1, 8)
    assert arms == [0, 1] + [1] * 6


def test_be2_pull_balance_invariant():
    rng = np.random.default_rng(0)
    z = rng.choice([-1, 1], size=(2, 200))
    pol = be2(3.0, T=200, delta=0.1)
    last = None
    for t in range(1, 201):
        a = pol.step(t, last)
        last = z[a, t - 1]
        s = pol.state
        assert (s.phase == "commit") == (s.committed is not None)
        assert s.pulls[0] - s.pulls[1] in (0, 1)


# -- bek ----------------------------------------------------------------
def bek(k, B, T=30, delta=1.0):
    return KArmedBudgetedExploration(BEConfig(B, delta, k), EpochLayout.from_delta(T, delta))


def test_bek_eliminates_trailing_arm():
    pol = bek(3, 2.0)
    rew = {0: 1, 1: 1, 2: -1}
    arms = drive(pol, lambda t, a: rew[a], 12)
    assert arms[:6] == [0, 1, 2, 0, 1, 2]
    assert 2 not in arms[6:]
    assert pol.state.active == [0, 1]


def test_bek_identical_rewards_never_eliminate():
    arms = drive(bek(4, 1.0), lambda t, a: 1, 20)
    assert arms == [0, 1, 2, 3] * 5


def test_bek_matches_be2_for_two_arms():
    rng = np.random.default_rng(11)
    for _ in range(100):
        z = rng.choice([-1, 1], size=(2, 60))
        B = float(rng.integers(1, 6))
        a2 = drive(be2(B, T=60, delta=0.5), lambda t, a: z[a, t - 1], 60)
        ak = drive(bek(2, B, T=60, delta=0.5), lambda t, a: z[a, t - 1], 60)
        assert a2 == ak


def test_bek_active_set_shrinks_monotonically():
    rng = np.random.default_rng(3)
    z = rng.choice([-1, 1], size=(4, 120), p=[0.3, 0.7])
    z[0] = 1
    pol = bek(4, 2.0, T=120, delta=0.5)
    sizes, last = [], None
    for t in range(1, 121):
        pol.step(t, last)
        last = z[pol._last_arm, t - 1]
        sizes.append((pol.state.epoch_index, len(pol.state.active)))
    for (e0, n0), (e1, n1) in zip(sizes, sizes[1:]):
        if e0 == e1:
            assert n1 <= n0


# -- baselines / spec ---------------------------------------------------
def test_oracle_on_linear_curve():
    curve = PiecewiseCurve(PiecewisePoly(np.array([0.0, 1.0]), np.array([[-0.5, 1.0]])))
    inst = BanditInstance.one_armed(curve, 100)
    pol = oracle_policy(inst)
    arms = [pol.step(t) for t in range(1, 101)]
    assert arms[:49] == [0] * 49 and arms[50:] == [1] * 50
    assert arms[49] == 0  # tie at x = 0.5 goes to the lower index


def test_fixed_arm():
    pol = fixed_arm(1)
    assert {pol.step(t) for t in range(1, 50)} == {1}


def test_policy_spec_json_round_trip():
    spec = PolicySpec("bek", 3.0, 0.1, 4)
    back = PolicySpec.from_json(spec.to_json())
    assert back == spec
    assert json.loads(PolicySpec("fixed", arm=1).to_json()) == {"policy": "fixed", "arm": 1}


def test_policy_spec_validation():
    with pytest.raises(ValueError):
        PolicySpec("ucb")
    with pytest.raises(ValueError):
        PolicySpec("be1", B=1.0)
    with pytest.raises(ValueError):
        PolicySpec("fixed")
    with pytest.raises(ValueError, match="unknown policy keys"):
        PolicySpec.from_dict({"policy": "oracle", "gamma": 1})
    inst = BanditInstance((ConstantCurve(0.0),) * 3, 10)
    with pytest.raises(ValueError):
        PolicySpec("be1", 1.0, 0.5).make(inst)
    with pytest.raises(ValueError):
        PolicySpec("bek", 1.0, 0.5, 2).make(inst)
