import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import kl_direct, lb_formula
from smoothbandits.adversary import (
    AdversaryConfig,
    epoch_distinguishability,
    estimate_regret,
    greedy_adversary,
    kl_pm1,
    lb_value,
    pinsker_gap,
    random_color_regrets,
)
from smoothbandits.construction import BOWL, RED, FamilySpec, growth_constant
from smoothbandits.policies import PolicySpec


def test_kl_known_value():
    assert kl_pm1(0.5, 0.0) == pytest.approx(0.130812, abs=1e-6)
    assert kl_pm1(0.3, 0.3) == 0.0


def test_kl_boundary():
    assert kl_pm1(0.5, 1.0) == math.inf
    assert kl_pm1(1.0, 1.0) == 0.0
    assert kl_pm1(1.0, 0.0) == pytest.approx(math.log(2))
    with pytest.raises(ValueError):
        kl_pm1(1.5, 0.0)


@given(st.floats(-0.99, 0.99), st.floats(-0.99, 0.99))
def test_kl_matches_textbook(a, b):
    assert kl_pm1(a, b) == pytest.approx(kl_direct(a, b), rel=1e-9, abs=1e-12)


@given(st.floats(-0.99, 0.99), st.floats(-0.99, 0.99))
def test_pinsker_dominates_tv(a, b):
    # total variation between the two ±1 laws is |a - b| / 2
    # tight as b -> a, hence the relative slack
    assert abs(a - b) / 2 <= pinsker_gap(kl_pm1(a, b)) * (1 + 1e-6) + 1e-15


@given(st.floats(-1.0, 1.0), st.floats(-0.999, 0.999))
def test_kl_nonnegative_zero_iff_equal(a, b):
    kl = kl_pm1(a, b)
    assert kl >= 0.0
    if a == b:
        assert kl <= 1e-15
    elif abs(a - b) > 1e-6:  # smaller gaps underflow to a KL of order gap^2
        assert kl > 0.0


def test_kl_vectorized():
    out = kl_pm1(np.array([0.5, 0.0]), np.array([0.0, 0.0]))
    assert out.shape == (2,) and out[1] == 0.0


def test_pinsker_rejects_negative():
    with pytest.raises(ValueError):
        pinsker_gap(-1e-3)


@pytest.mark.parametrize("beta", [1, 2, 3, 4])
def test_epoch_gap_at_most_half(beta):
    checked = 0
    for logT in range(10, 37, 2):
        try:
            d = epoch_distinguishability(beta, 2**logT)
        except ValueError:
            continue  # no full epoch fits at this horizon
        assert d.gap <= 0.5 + 1e-12
        checked += 1
    assert checked >= 3


def test_epoch_budget_is_horizon_free():
    a = epoch_distinguishability(2, 2**14).budget
    b = epoch_distinguishability(2, 2**22).budget
    assert a == pytest.approx(b, rel=1e-9)


def test_lb_values():
    assert lb_value(1, 10**6) == pytest.approx(10**4 / 48, rel=1e-12)
    assert lb_value(2, 1.0) == pytest.approx(0.03157, abs=1e-5)
    with pytest.raises(ValueError):
        lb_value(0, 100)


@pytest.mark.parametrize("beta", [1, 2, 3])
def test_lb_matches_formula(beta):
    c = 2.0 ** (1 - beta * (beta + 1) / 2)
    assert growth_constant(beta) == pytest.approx(c, rel=1e-12)
    for T in (1e4, 1e6, 1e8):
        assert lb_value(beta, T) == pytest.approx(lb_formula(beta, T, c), rel=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        AdversaryConfig(1, 10**4, rollouts_per_decision=5)
    with pytest.raises(ValueError):
        AdversaryConfig(1, 10**4, final_trials=1)
    with pytest.raises(ValueError):
        AdversaryConfig(3, 10**3)


def test_single_epoch_fixed_arms():
    adv = AdversaryConfig(1, 50, rollouts_per_decision=10, final_trials=4)
    assert adv.family().m == 1
    assert str(greedy_adversary(PolicySpec("fixed", arm=1), adv).colors) == BOWL
    assert str(greedy_adversary(PolicySpec("fixed", arm=0), adv).colors) == RED


def test_fixed_arm_regret_all_red_is_zero():
    spec = FamilySpec.build(1, 2000)
    r = estimate_regret(PolicySpec("fixed", arm=1), spec, 4, master_seed=0)
    assert r.mean == 0.0


def test_greedy_deterministic_across_workers():
    adv = AdversaryConfig(1, 4000, rollouts_per_decision=12, final_trials=8, master_seed=3)
    pol = PolicySpec("be1", 20.0, 0.1)
    a = greedy_adversary(pol, adv, workers=1)
    b = greedy_adversary(pol, adv, workers=3)
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())
    assert len(a.colors) == adv.family().m
    assert a.ratio == pytest.approx(a.estimated_regret / lb_value(1, 4000))


def test_random_sequences_reproducible():
    adv = AdversaryConfig(1, 3000, rollouts_per_decision=10, final_trials=4, master_seed=5)
    pol = PolicySpec("be1", 15.0, 0.1)
    a = random_color_regrets(pol, adv, 3)
    b = random_color_regrets(pol, adv, 3)
    assert [(str(c), r.values) for c, r in a] == [(str(c), r.values) for c, r in b]


def test_adversary_rejects_wrong_arm_count():
    with pytest.raises(ValueError):
        greedy_adversary(PolicySpec("bek", 5.0, 0.2, 3), AdversaryConfig(1, 3000, 10, 0, 2))
