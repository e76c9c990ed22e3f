"""Budgeted Exploration policies and baselines.

The classes here are the round-by-round reference implementations
(``policy.step(t, last_reward)``).  Full episodes are run by the compiled
kernels in :mod:`smoothbandits.kernels`; tests replay reward streams
through both and require identical arm sequences.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .layout import EpochLayout

EXPLORE, COMMIT = "explore", "commit"
POLICY_KINDS = ("be1", "be2", "bek", "oracle", "fixed")


class PolicyStateError(RuntimeError):
    """Rounds fed out of order or a missing reward."""


@dataclass(frozen=True)
class BEConfig:
    B: float
    Delta: float
    k: int = 2

    def __post_init__(self):
        if not self.B > 0:
            raise ValueError(f"budget B must be positive, got {self.B}")
        if not 0 < self.Delta <= 1:
            raise ValueError(f"epoch length Delta must lie in (0, 1], got {self.Delta}")
        if self.k < 2:
            raise ValueError("k counts all arms including the static one; need k >= 2")


def default_params(beta: int, T: int, L: float = 1.0, k: int = 2, style: str = "experiment") -> BEConfig:
    """Parameter schedules for ``BE(B, Delta)`` (natural logarithms throughout).

    ``experiment``: ``(T^(1/3), T^(-1/3))`` for beta=1, ``(T^(2/5), T^(-1/5))`` for beta=2.
    ``theoretical``: the L-dependent, log-corrected schedules.
    ``k > 2`` uses the k-armed schedule regardless of ``style``.
    """
    if T < 16:
        raise ValueError("T must be >= 16")
    if beta not in (1, 2):
        raise ValueError("schedules exist for beta in {1, 2}")
    if style not in ("experiment", "theoretical"):
        raise ValueError(f"unknown style {style!r}")
    lt = math.log(T)
    if k > 2:
        lk = math.log(k)
        delta = k ** (-3 / 5) * T ** (-2 / 5) * lt ** (1 / 5) * lk ** (1 / 5)
        B = math.sqrt(delta * T * lt * lk / k)
    elif style == "experiment":
        if beta == 1:
            B, delta = T ** (1 / 3), T ** (-1 / 3)
        else:
            B, delta = T ** (2 / 5), T ** (-1 / 5)
    elif beta == 1:
        delta = L ** (-2 / 3) * T ** (-1 / 3) * lt ** (1 / 3)
        B = L ** (-1 / 3) * T ** (1 / 3) * lt ** (2 / 3)
    else:
        delta = L ** (-2 / 5) * T ** (-1 / 5) * lt ** (1 / 5)
        B = L ** (-1 / 5) * T ** (2 / 5) * lt ** (3 / 5)
    if delta >= 1:
        raise ValueError(f"degenerate schedule: Delta = {delta:.4g} >= 1")
    if B >= delta * T:
        raise ValueError(f"degenerate schedule: B = {B:.4g} >= Delta*T = {delta * T:.4g}")
    return BEConfig(B, delta, k)


# ----------------------------------------------------------------------
@dataclass
class BEState:
    epoch_index: int
    phase: str
    cum: list[float]
    pulls: list[int]
    active: list[int]
    committed: int | None = None
    pos: int = 0

    @classmethod
    def fresh(cls, epoch_index: int, k: int) -> "BEState":
        return cls(epoch_index, EXPLORE, [0.0] * k, [0] * k, list(range(k)))

    def commit(self, arm: int):
        self.phase = COMMIT
        self.committed = arm


class _SteppedPolicy:
    """Shared bookkeeping: round order, reward hand-off, epoch resets."""

    def __init__(self, config: BEConfig, layout: EpochLayout):
        self.config = config
        self.layout = layout
        self.state = BEState.fresh(-1, config.k)
        self._last_t: int | None = None
        self._last_arm: int | None = None

    def step(self, t: int, last_reward: float | None = None) -> int:
        if self._last_t is None:
            if t != 1:
                raise PolicyStateError(f"first round must be 1, got {t}")
        else:
            if t != self._last_t + 1:
                raise PolicyStateError(f"expected round {self._last_t + 1}, got {t}")
            if last_reward is None:
                raise PolicyStateError(f"missing reward for round {self._last_t}")
            self._observe(self._last_arm, float(last_reward))
        e = self.layout.epoch_of(t)
        if e != self.state.epoch_index:
            self.state = BEState.fresh(e, self.config.k)
        arm = self.state.committed if self.state.phase == COMMIT else self._explore_arm()
        self._last_t, self._last_arm = t, arm
        return arm

    def _explore_arm(self) -> int:
        raise NotImplementedError

    def _observe(self, arm: int, z: float):
        raise NotImplementedError


class BudgetedExploration(_SteppedPolicy):
    """One-armed BE: pull arm 1 until the epoch's cumulative reward hits ``<= -B``."""

    def _explore_arm(self):
        return 1

    def _observe(self, arm, z):
        s = self.state
        if s.phase != EXPLORE:
            return
        s.cum[1] += z
        s.pulls[1] += 1
        if s.cum[1] <= -self.config.B:
            s.commit(0)


class TwoArmedBudgetedExploration(_SteppedPolicy):
    """Alternate 0, 1, 0, 1, ...; commit to the leader once ``|sum(Z0 - Z1)| > B``."""

    def _explore_arm(self):
        s = self.state
        return 0 if s.pulls[0] == s.pulls[1] else 1

    def _observe(self, arm, z):
        s = self.state
        if s.phase != EXPLORE:
            return
        s.cum[arm] += z
        s.pulls[arm] += 1
        if arm == 1:
            d = s.cum[0] - s.cum[1]
            if abs(d) > self.config.B:
                s.commit(0 if d >= 0 else 1)


class KArmedBudgetedExploration(_SteppedPolicy):
    """Round-robin successive elimination with budget ``B`` inside each epoch."""

    def _explore_arm(self):
        s = self.state
        return s.active[s.pos]

    def _observe(self, arm, z):
        s = self.state
        if s.phase != EXPLORE:
            return
        s.cum[arm] += z
        s.pulls[arm] += 1
        s.pos += 1
        if s.pos == len(s.active):
            s.pos = 0
            best = max(s.cum[a] for a in s.active)
            s.active = [a for a in s.active if best - s.cum[a] <= self.config.B]
            if len(s.active) == 1:
                s.commit(s.active[0])


class OraclePolicy:
    """Plays ``argmax_a r_a(t)`` (lowest index on ties); simulation only."""

    def __init__(self, means: np.ndarray):
        self.choice = np.argmax(np.asarray(means), axis=0)

    def step(self, t: int, last_reward: float | None = None) -> int:
        return int(self.choice[t - 1])


class FixedArmPolicy:
    def __init__(self, arm: int):
        self.arm = int(arm)

    def step(self, t: int, last_reward: float | None = None) -> int:
        return self.arm


def oracle_policy(instance) -> OraclePolicy:
    return OraclePolicy(instance.means)


def fixed_arm(a: int) -> FixedArmPolicy:
    return FixedArmPolicy(a)


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class PolicySpec:
    """Serializable policy description.

    JSON form: ``{"policy": "be1"|"be2"|"bek"|"oracle"|"fixed", "B": ..,
    "Delta": .., "k": .., "arm": ..}`` with unused fields omitted.
    """

    policy: str
    B: float | None = None
    Delta: float | None = None
    k: int | None = None
    arm: int | None = None
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.policy not in POLICY_KINDS:
            raise ValueError(f"unknown policy {self.policy!r}; expected one of {POLICY_KINDS}")
        if self.policy in ("be1", "be2", "bek"):
            if self.B is None or self.Delta is None:
                raise ValueError(f"{self.policy} needs B and Delta")
            BEConfig(self.B, self.Delta, self.k or 2)
        if self.policy == "bek" and self.k is None:
            raise ValueError("bek needs k")
        if self.policy == "fixed" and (self.arm is None or self.arm < 0):
            raise ValueError("fixed needs a nonnegative arm")

    @property
    def name(self) -> str:
        return self.label or self.policy

    @classmethod
    def be(cls, config: BEConfig, policy: str = "be1", label: str | None = None) -> "PolicySpec":
        k = config.k if policy == "bek" else None
        return cls(policy, float(config.B), float(config.Delta), k, None, label)

    def config(self) -> BEConfig:
        return BEConfig(self.B, self.Delta, self.k or 2)

    def layout(self, T: int) -> EpochLayout:
        if self.Delta is None:
            return EpochLayout.single(T)
        return EpochLayout.from_delta(T, self.Delta)

    def check_arms(self, k: int):
        need = {"be1": 2, "be2": 2}.get(self.policy)
        if need is not None and k != need:
            raise ValueError(f"{self.policy} needs a {need}-armed instance, got {k} arms")
        if self.policy == "bek" and self.k != k:
            raise ValueError(f"bek configured for k={self.k} but instance has {k} arms")
        if self.policy == "fixed" and self.arm >= k:
            raise ValueError(f"fixed arm {self.arm} out of range for {k} arms")

    def make(self, instance):
        """Round-by-round reference policy bound to ``instance``."""
        self.check_arms(instance.k)
        if self.policy == "oracle":
            return oracle_policy(instance)
        if self.policy == "fixed":
            return fixed_arm(self.arm)
        cls = {"be1": BudgetedExploration, "be2": TwoArmedBudgetedExploration,
               "bek": KArmedBudgetedExploration}[self.policy]
        cfg = BEConfig(self.B, self.Delta, instance.k)
        return cls(cfg, self.layout(instance.T))

    def to_dict(self) -> dict[str, Any]:
        d = {key: v for key, v in asdict(self).items() if v is not None and key != "label"}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PolicySpec":
        extra = set(d) - {"policy", "B", "Delta", "k", "arm", "label"}
        if extra:
            raise ValueError(f"unknown policy keys: {sorted(extra)}")
        return cls(
            d.get("policy"),
            None if d.get("B") is None else float(d["B"]),
            None if d.get("Delta") is None else float(d["Delta"]),
            None if d.get("k") is None else int(d["k"]),
            None if d.get("arm") is None else int(d["arm"]),
            d.get("label"),
        )

    @classmethod
    def from_json(cls, text: str) -> "PolicySpec":
        return cls.from_dict(json.loads(text))
