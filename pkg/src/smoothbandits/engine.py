"""Episode simulation, regret accounting, Monte-Carlo aggregation and probes.

Randomness: trial ``(master_seed, trial_index)`` owns the generator
``PCG64(SeedSequence([master_seed, trial_index]))`` and draws one uniform per
round up front.  The played arm's reward at round ``t`` is ``+1`` iff
``u[t] < (1 + r) / 2``, so two policies run on the same trial see common
random numbers.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from .kernels import get_backend
from .layout import EpochLayout
from .policies import BEConfig, PolicySpec
from .rewards import BanditInstance

MAX_SCAN_T = 4096


def trial_rng(master_seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(master_seed), *map(int, key)])))


def draw_reward(rng: np.random.Generator, r: float) -> int:
    """One ``±1`` reward with mean ``r``."""
    if not -1.0 <= r <= 1.0:
        raise ValueError(f"mean reward {r} outside [-1, 1]")
    return 1 if rng.random() < 0.5 * (1.0 + r) else -1


def rewards_from_uniforms(u: np.ndarray, r: np.ndarray) -> np.ndarray:
    return np.where(u < 0.5 * (1.0 + r), 1.0, -1.0)


def thread_count(requested: int | None = None) -> int:
    """Worker count: ``requested`` or the CPU count, capped by ``SBL_THREADS``."""
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("SBL_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"SBL_THREADS must be an integer, got {cap!r}") from None
    return max(1, n)


def play(policy: PolicySpec, means: np.ndarray, u: np.ndarray, bounds: np.ndarray, backend=None) -> np.ndarray:
    """Arm sequence of ``policy`` on a mean table and uniform stream."""
    kern = backend or get_backend()
    T = means.shape[1]
    arms = np.empty(T, dtype=np.int64)
    if policy.policy == "be1":
        kern.be1(means, u, bounds, float(policy.B), arms)
    elif policy.policy == "be2":
        kern.be2(means, u, bounds, float(policy.B), arms)
    elif policy.policy == "bek":
        kern.bek(means, u, bounds, float(policy.B), arms)
    elif policy.policy == "oracle":
        kern.oracle(means, arms)
    else:
        arms[:] = policy.arm
    return arms


@dataclass(frozen=True)
class RunConfig:
    master_seed: int
    trial_index: int
    instance: BanditInstance
    policy: PolicySpec
    record_trajectory: bool = False

    def with_trial(self, i: int) -> "RunConfig":
        return replace(self, trial_index=i)


@dataclass
class RegretReport:
    realized_regret: float
    mean_regret: float
    per_epoch: list[float]
    pulls: list[int]
    clean_violations: int | None = None
    arms: list[int] | None = field(default=None, repr=False)
    rewards: list[int] | None = field(default=None, repr=False)

    def to_dict(self) -> dict[str, Any]:
        d = {
            "realized_regret": self.realized_regret,
            "mean_regret": self.mean_regret,
            "per_epoch": self.per_epoch,
            "pulls": self.pulls,
            "clean_violations": self.clean_violations,
        }
        if self.arms is not None:
            d["arms"] = self.arms
            d["rewards"] = self.rewards
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def run_episode(config: RunConfig, backend=None) -> RegretReport:
    inst, pol = config.instance, config.policy
    pol.check_arms(inst.k)
    kern = backend or get_backend()
    means = inst.means
    u = trial_rng(config.master_seed, config.trial_index).random(inst.T)
    bounds = pol.layout(inst.T).boundaries
    arms = play(pol, means, u, bounds, kern)
    per_epoch = np.zeros(bounds.size - 1)
    pulls = np.zeros(inst.k, dtype=np.int64)
    realized, mean_reg = kern.account(means, u, arms, bounds, per_epoch, pulls)
    report = RegretReport(float(realized), float(mean_reg), per_epoch.tolist(), pulls.tolist())
    if config.record_trajectory:
        cols = np.arange(inst.T)
        report.arms = arms.tolist()
        report.rewards = rewards_from_uniforms(u, means[arms, cols]).astype(int).tolist()
    return report


@dataclass(frozen=True)
class MonteCarloResult:
    mean: float
    stderr: float | None
    values: tuple[float, ...]

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "MonteCarloResult":
        v = np.asarray(values, dtype=float)
        se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size >= 2 else None
        return cls(float(v.mean()), se, tuple(v.tolist()))


def map_ordered(fn, items: Sequence, workers: int | None = None) -> list:
    """``[fn(x) for x in items]`` on a thread pool; output order follows ``items``."""
    n = thread_count(workers)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def monte_carlo(
    configs: RunConfig | Sequence[RunConfig],
    n_trials: int | None = None,
    workers: int | None = None,
    flavor: str = "mean",
) -> MonteCarloResult:
    """Average regret over trials.

    A single config is expanded to ``trial_index = 0..n_trials-1``; a sequence
    is run as given.  Values are aggregated in input order.
    """
    if isinstance(configs, RunConfig):
        if n_trials is None or n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        configs = [configs.with_trial(i) for i in range(n_trials)]
    elif n_trials is not None and n_trials != len(configs):
        raise ValueError("n_trials disagrees with the number of configs")
    if flavor not in ("mean", "realized"):
        raise ValueError(f"unknown regret flavor {flavor!r}")
    attr = "mean_regret" if flavor == "mean" else "realized_regret"
    values = map_ordered(lambda c: getattr(run_episode(c), attr), list(configs), workers)
    return MonteCarloResult.from_values(values)


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CleanScan:
    upper: int
    two_sided: int

    @property
    def violations(self) -> int:
        return self.two_sided


def clean_event_scan(means, draws, log_T: float, k_arms: int | None = None, backend=None) -> CleanScan:
    """Count windows whose reward deviation leaves the clean-event envelope.

    A window ``[t, t']`` with ``t' - t >= 2 log_T`` is flagged when its
    deviation sum exceeds ``sqrt(6 log_T (t' - t))`` (times ``log k / k``
    inside the root for ``k_arms``).
    """
    means = np.asarray(means, dtype=float)
    draws = np.asarray(draws, dtype=float)
    if means.shape != draws.shape or means.ndim != 1:
        raise ValueError("means and draws must be aligned 1-d arrays")
    if means.size > MAX_SCAN_T:
        raise ValueError(f"clean-event scan is quadratic; refusing T = {means.size} > {MAX_SCAN_T}")
    coef = 6.0 * log_T
    if k_arms is not None:
        if k_arms < 2:
            raise ValueError("k_arms must be >= 2")
        coef *= math.log(k_arms) / k_arms
    kern = backend or get_backend()
    up, both = kern.clean_scan(draws - means, coef, 2.0 * log_T)
    return CleanScan(int(up), int(both))


@dataclass(frozen=True)
class CleanFrequency:
    trials: int
    upper_trials: int
    two_sided_trials: int

    @property
    def fraction(self) -> float:
        return self.two_sided_trials / self.trials

    @property
    def upper_fraction(self) -> float:
        return self.upper_trials / self.trials


def clean_event_frequency(mu: float, T: int, n_trials: int, master_seed: int = 0, workers: int | None = None) -> CleanFrequency:
    """Fraction of trials of a constant-mean stream with at least one violation."""
    means = np.full(T, float(mu))
    log_T = math.log(T)

    def one(i):
        u = trial_rng(master_seed, i).random(T)
        s = clean_event_scan(means, rewards_from_uniforms(u, means), log_T)
        return s.upper > 0, s.two_sided > 0

    flags = map_ordered(one, range(n_trials), workers)
    return CleanFrequency(n_trials, sum(a for a, _ in flags), sum(b for _, b in flags))


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class WaldEstimate:
    sum_z: float
    sum_r: float
    stderr: float
    n: int

    @property
    def gap(self) -> float:
        return abs(self.sum_z - self.sum_r)


def wald_probe(instance: BanditInstance, config: BEConfig, n: int, master_seed: int = 0, backend=None) -> WaldEstimate:
    """Both sides of Wald's identity over the first epoch's exploration phase.

    Sums run over the rounds in which arm 1 is explored, including the
    stopping round.  ``stderr`` combines the two sample standard errors in
    quadrature.
    """
    if instance.k != 2:
        raise ValueError("wald_probe needs a one-armed (two-arm) instance")
    if n < 2:
        raise ValueError("need n >= 2 for a standard error")
    kern = backend or get_backend()
    end = int(EpochLayout.from_delta(instance.T, config.Delta).boundaries[1])
    means = np.ascontiguousarray(instance.means[:, :end])
    bounds = np.array([0, end], dtype=np.int64)
    r1 = means[1]
    sz = np.empty(n)
    sr = np.empty(n)
    arms = np.empty(end, dtype=np.int64)
    for i in range(n):
        u = trial_rng(master_seed, i).random(end)
        kern.be1(means, u, bounds, float(config.B), arms)
        explored = arms == 1
        sz[i] = rewards_from_uniforms(u[explored], r1[explored]).sum()
        sr[i] = r1[explored].sum()
    se = math.sqrt(sz.var(ddof=1) / n + sr.var(ddof=1) / n)
    return WaldEstimate(float(sz.mean()), float(sr.mean()), se, n)
