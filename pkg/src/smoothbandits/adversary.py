"""Information-theoretic helpers and the greedy red/bowl adversary."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.special import rel_entr

from .construction import BOWL, RED, ColorSeq, FamilySpec, delta_for, family_curve, growth_constant
from .engine import MonteCarloResult, map_ordered, play, trial_rng
from .policies import PolicySpec
from .rewards import BanditInstance, ConstantCurve

_ROLLOUT, _FINAL, _RANDOM = 0, 1, 2


def kl_pm1(r1, r2):
    """KL divergence between ``±1`` variables with means ``r1`` and ``r2``.

    Vectorized; returns ``inf`` where ``r2`` sits on the boundary and
    differs from ``r1``.
    """
    a = np.asarray(r1, dtype=float)
    b = np.asarray(r2, dtype=float)
    if np.any(np.abs(a) > 1) or np.any(np.abs(b) > 1):
        raise ValueError("means of ±1 variables must lie in [-1, 1]")
    p, q = 0.5 * (1 + a), 0.5 * (1 + b)
    out = rel_entr(p, q) + rel_entr(1 - p, 1 - q)
    return float(out) if out.ndim == 0 else out


def pinsker_gap(kl: float) -> float:
    """Largest event-probability gap allowed by a KL divergence of ``kl``."""
    if kl < 0:
        raise ValueError("KL divergence is nonnegative")
    return math.sqrt(kl / 2.0)


@dataclass(frozen=True)
class Distinguishability:
    budget: float
    gap: float


def epoch_distinguishability(beta: int, T: int, delta: float | None = None) -> Distinguishability:
    """Per-epoch KL budget ``(2^(2b) C_b^2 / 3) delta^(2b) * 6 delta T`` and its Pinsker gap."""
    if delta is None:
        delta = delta_for(beta, T)
    c = growth_constant(beta)
    budget = (2.0 ** (2 * beta) * c * c / 3.0) * delta ** (2 * beta) * 6.0 * delta * T
    return Distinguishability(budget, pinsker_gap(budget))


def lb_value(beta: int, T: float) -> float:
    """Regret floor ``2^-b / 24 * C_b^(-2b/(2b+1)) * T^((b+1)/(2b+1))``."""
    if beta < 1:
        raise ValueError("beta must be a positive integer")
    c = growth_constant(beta)
    p = 2 * beta + 1
    return 2.0 ** (-beta) / 24.0 * c ** (-2.0 * beta / p) * float(T) ** ((beta + 1) / p)


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class AdversaryConfig:
    beta: int
    T: int
    rollouts_per_decision: int = 64
    master_seed: int = 0
    final_trials: int = 256

    def __post_init__(self):
        if self.rollouts_per_decision < 10:
            raise ValueError("rollouts_per_decision must be >= 10")
        if self.final_trials < 2:
            raise ValueError("final_trials must be >= 2")
        delta_for(self.beta, self.T)  # raises when no full epoch fits

    def family(self, colors=None) -> FamilySpec:
        return FamilySpec.build(self.beta, self.T, colors)


@dataclass(frozen=True)
class AdversaryResult:
    colors: ColorSeq
    estimated_regret: float
    stderr: float
    lb_value: float

    @property
    def ratio(self) -> float:
        return self.estimated_regret / self.lb_value

    def to_dict(self) -> dict[str, Any]:
        return {
            "colors": str(self.colors),
            "estimated_regret": self.estimated_regret,
            "stderr": self.stderr,
            "lb_value": self.lb_value,
            "ratio": self.ratio,
        }


def _means(spec: FamilySpec) -> np.ndarray:
    return BanditInstance((ConstantCurve(0.0), family_curve(spec)), spec.T).means


def _clipped_bounds(policy: PolicySpec, T: int, end: int) -> np.ndarray:
    b = policy.layout(T).boundaries
    return np.append(b[b < end], end).astype(np.int64)


def _window_regret(means: np.ndarray, arms: np.ndarray, lo: int, hi: int) -> float:
    cols = np.arange(lo, hi)
    best = means[:, lo:hi].max(axis=0)
    return float(np.sum(best - means[arms[lo:hi], cols]))


def estimate_regret(
    policy: PolicySpec, spec: FamilySpec, n: int, master_seed: int, workers: int | None = None
) -> MonteCarloResult:
    """Mean regret of ``policy`` on the family member ``spec`` over fresh seeds."""
    policy.check_arms(2)
    means = _means(spec)
    bounds = policy.layout(spec.T).boundaries

    def one(i):
        u = trial_rng(master_seed, _FINAL, i).random(spec.T)
        return _window_regret(means, play(policy, means, u, bounds), 0, spec.T)

    return MonteCarloResult.from_values(map_ordered(one, range(n), workers))


def _round_window(spec: FamilySpec, j: int) -> tuple[int, int]:
    # columns c (round c+1) whose x = (c+1)/T falls in epoch j
    edges = spec.epoch_edges()
    return int(math.floor(edges[j] * spec.T)), int(math.floor(edges[j + 1] * spec.T))


def greedy_adversary(policy: PolicySpec, adv: AdversaryConfig, workers: int | None = None) -> AdversaryResult:
    """Fix epoch colors left to right, each time taking the color with larger estimated epoch regret.

    Both candidates of a decision are evaluated on the same ``R`` noise
    streams; rollouts stop at the end of the epoch being decided.  Ties go
    to red.
    """
    policy.check_arms(2)
    base = adv.family()
    chosen: list[str] = []
    for j in range(base.m):
        lo, hi = _round_window(base, j)
        pad = [RED] * (base.m - j - 1)
        tables = {c: np.ascontiguousarray(_means(base.with_colors(chosen + [c] + pad))[:, :hi]) for c in (RED, BOWL)}
        bounds = _clipped_bounds(policy, adv.T, hi)

        def one(r):
            u = trial_rng(adv.master_seed, _ROLLOUT, j, r).random(hi)
            out = []
            for c in (RED, BOWL):
                arms = play(policy, tables[c], u, bounds)
                out.append(_window_regret(tables[c], arms, lo, hi))
            return out

        regs = map_ordered(one, range(adv.rollouts_per_decision), workers)
        reg = np.asarray(regs).mean(axis=0)
        chosen.append(BOWL if reg[1] > reg[0] else RED)
    spec = base.with_colors(chosen)
    est = estimate_regret(policy, spec, adv.final_trials, adv.master_seed, workers)
    return AdversaryResult(spec.colors, est.mean, est.stderr, lb_value(adv.beta, adv.T))


def random_color_regrets(
    policy: PolicySpec, adv: AdversaryConfig, n_sequences: int = 10, workers: int | None = None
) -> list[tuple[ColorSeq, MonteCarloResult]]:
    """Regret estimates for uniformly random color sequences (same fresh seeds as the greedy estimate)."""
    base = adv.family()
    rng = trial_rng(adv.master_seed, _RANDOM)
    out = []
    for _ in range(n_sequences):
        colors = ColorSeq(tuple(np.where(rng.random(base.m) < 0.5, RED, BOWL).tolist()))
        out.append((colors, estimate_regret(policy, base.with_colors(colors), adv.final_trials, adv.master_seed, workers)))
    return out
