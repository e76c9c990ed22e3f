"""Mean-reward curves on normalized time, bandit instances, and their analysis.

Every curve maps normalized time ``x in [0, 1]`` to a mean reward in
``[-1, 1]``; round ``t`` of a horizon-``T`` instance sees ``mu(t / T)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np

from .layout import EpochLayout
from .piecewise import PiecewisePoly

BOUND_CHECK_POINTS = 10_001
HOLDER_RTOL = 1e-3
ZERO_RTOL = 1e-12
MIN_POINTS_PER_FEATURE = 8


class RewardCurve:
    """Base class: callable on arrays of normalized times."""

    kind: str = "abstract"

    def __call__(self, x):
        raise NotImplementedError

    @property
    def feature_scale(self) -> float | None:
        """Smallest length scale on which the curve changes shape (None: unknown)."""
        return None

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    def _check_bounded(self):
        xs = np.linspace(0.0, 1.0, BOUND_CHECK_POINTS)
        peak = float(np.max(np.abs(self(xs))))
        if not np.isfinite(peak) or peak > 1.0:
            raise ValueError(f"{self.kind} curve leaves [-1, 1] (max |mu| = {peak:.4g})")


@dataclass(frozen=True)
class ConstantCurve(RewardCurve):
    c: float
    kind = "constant"

    def __post_init__(self):
        self._check_bounded()

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.full(x.shape, float(self.c))
        return out if out.ndim else float(out)

    @property
    def feature_scale(self):
        return math.inf

    def to_dict(self):
        return {"kind": "constant", "c": self.c}


@dataclass(frozen=True)
class SinusoidalCurve(RewardCurve):
    """``mu(x) = -A sin(2 pi nu x + phi) + offset`` with ``offset`` defaulting to ``A``."""

    A: float
    nu: float
    phi: float
    offset: float | None = None
    kind = "sinusoidal"

    def __post_init__(self):
        self._check_bounded()

    @property
    def level(self) -> float:
        return self.A if self.offset is None else self.offset

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = -self.A * np.sin(2.0 * np.pi * self.nu * x + self.phi) + self.level
        return out if out.ndim else float(out)

    @property
    def feature_scale(self):
        return math.inf if self.nu == 0 else 1.0 / abs(self.nu)

    def sup_derivative(self, order: int) -> float:
        """Closed-form ``sup |mu^(order)|``."""
        if order == 0:
            return abs(self.A) + abs(self.level)
        return abs(self.A) * (2.0 * np.pi * abs(self.nu)) ** order

    def to_dict(self):
        d = {"kind": "sinusoidal", "A": self.A, "nu": self.nu, "phi": self.phi}
        if self.offset is not None:
            d["offset"] = self.offset
        return d


@dataclass(frozen=True, eq=False)
class PiecewiseCurve(RewardCurve):
    """Piecewise polynomial ``poly`` on ``[0, span]`` read at ``x * span``."""

    poly: PiecewisePoly
    kind = "piecewise"

    def __post_init__(self):
        self._check_bounded()

    @property
    def span(self) -> float:
        return self.poly.span

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        return self.poly(x * self.span)

    @property
    def feature_scale(self):
        return float(np.min(self.poly.widths)) / self.span

    def to_dict(self):
        return {
            "kind": "piecewise",
            "breakpoints": self.poly.breakpoints.tolist(),
            "coeffs": self.poly.coeffs.tolist(),
        }


def curve_from_dict(d: dict[str, Any]) -> RewardCurve:
    """Inverse of ``RewardCurve.to_dict``; unknown keys are rejected."""
    d = dict(d)
    kind = d.pop("kind", None)
    allowed = {
        "constant": {"c"},
        "sinusoidal": {"A", "nu", "phi", "offset"},
        "piecewise": {"breakpoints", "coeffs"},
        "family": {"beta", "T", "colors"},
    }
    if kind not in allowed:
        raise ValueError(f"unknown curve kind {kind!r}; expected one of {sorted(allowed)}")
    extra = set(d) - allowed[kind]
    if extra:
        raise ValueError(f"unknown keys for {kind} curve: {sorted(extra)}")
    if kind == "constant":
        return ConstantCurve(float(d["c"]))
    if kind == "sinusoidal":
        off = d.get("offset")
        return SinusoidalCurve(float(d["A"]), float(d["nu"]), float(d["phi"]),
                               None if off is None else float(off))
    if kind == "piecewise":
        return PiecewiseCurve(PiecewisePoly(np.array(d["breakpoints"]), np.array(d["coeffs"])))
    from .construction import FamilySpec, family_curve

    return family_curve(FamilySpec.build(int(d["beta"]), int(d["T"]), d["colors"]))


# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class BanditInstance:
    """Ordered arms (arm 0 first) over horizon ``T``."""

    arms: tuple
    T: int

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(self.arms))
        if len(self.arms) < 2:
            raise ValueError("an instance needs at least 2 arms")
        if int(self.T) < 1:
            raise ValueError("horizon T must be >= 1")
        object.__setattr__(self, "T", int(self.T))

    @classmethod
    def one_armed(cls, curve: RewardCurve, T: int) -> "BanditInstance":
        return cls((ConstantCurve(0.0), curve), T)

    @property
    def k(self) -> int:
        return len(self.arms)

    @cached_property
    def means(self) -> np.ndarray:
        """``(k, T)`` table of ``r_a(t)`` for ``t = 1..T`` (read-only, cached)."""
        x = np.arange(1, self.T + 1, dtype=np.float64) / self.T
        tab = np.ascontiguousarray(np.vstack([np.asarray(a(x), dtype=np.float64) for a in self.arms]))
        tab.setflags(write=False)
        return tab

    def with_horizon(self, T: int) -> "BanditInstance":
        return BanditInstance(self.arms, T)

    def to_dict(self) -> dict[str, Any]:
        return {"T": self.T, "arms": [a.to_dict() for a in self.arms]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "BanditInstance":
        extra = set(d) - {"T", "arms"}
        if extra:
            raise ValueError(f"unknown instance keys: {sorted(extra)}")
        return cls(tuple(curve_from_dict(a) for a in d["arms"]), int(d["T"]))


def eval_mean(curve: RewardCurve, t: int, T: int) -> float:
    """Mean reward ``mu(t / T)`` of round ``t`` (1-based)."""
    if not 1 <= t <= T:
        raise ValueError(f"round {t} outside 1..{T}")
    return float(curve(t / T))


def sinusoidal_instance(A: float, nu: float, phi: float, T: int) -> BanditInstance:
    """Experiment instance: static arm at ``A``, changing arm ``-A sin(2 pi nu x + phi) + A``."""
    return BanditInstance((ConstantCurve(A), SinusoidalCurve(A, nu, phi)), T)


def sample_sinusoidal_instance(rng: np.random.Generator, T: int) -> BanditInstance:
    """Draw ``nu ~ U[2.5, 5]``, ``A ~ N(0.25 nu^-2, var 0.001)``, ``phi ~ U[0, 2 pi]`` in that order."""
    nu = rng.uniform(2.5, 5.0)
    A = rng.normal(0.25 / nu**2, math.sqrt(0.001))
    phi = rng.uniform(0.0, 2.0 * math.pi)
    return sinusoidal_instance(float(A), float(nu), float(phi), T)


def gap_reduction(instance: BanditInstance) -> BanditInstance:
    """One-armed equivalent of a sinusoidal experiment instance (arm 1 minus arm 0)."""
    a0, a1 = instance.arms[:2]
    if instance.k != 2 or not isinstance(a0, ConstantCurve) or not isinstance(a1, SinusoidalCurve):
        raise ValueError("gap reduction is defined for [constant, sinusoidal] instances")
    return BanditInstance.one_armed(
        SinusoidalCurve(a1.A, a1.nu, a1.phi, offset=a1.level - a0.c), instance.T
    )


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class HolderReport:
    beta: int
    L: float
    grid_n: int
    max_ratio_f: float
    max_ratio_deriv: float
    resolved: bool
    passed: bool
    tol: float = HOLDER_RTOL

    def to_dict(self) -> dict[str, Any]:
        return {
            "beta": self.beta, "L": self.L, "grid_n": self.grid_n,
            "max_ratio_f": self.max_ratio_f, "max_ratio_deriv": self.max_ratio_deriv,
            "resolved": self.resolved, "pass": self.passed, "tol": self.tol,
        }


def certify_holder(curve, beta: int, L: float, grid_n: int, tol: float = HOLDER_RTOL) -> HolderReport:
    """Finite-difference check that ``curve`` lies in the Hölder class ``(beta, L)``.

    On the grid ``x_i = i / grid_n`` the ``(beta-1)``-th derivative at the
    midpoint of each stencil is estimated by the ``(beta-1)``-th central
    difference (which lands exactly on grid nodes), and Lipschitz ratios of
    ``f`` and of that estimate are maximized over neighbouring points.
    A grid coarser than ``MIN_POINTS_PER_FEATURE * beta`` points per
    ``curve.feature_scale`` is reported as unresolved and never passes.
    """
    if beta < 1:
        raise ValueError("beta must be >= 1")
    if grid_n < 10 * beta:
        raise ValueError(f"grid_n must be >= 10*beta = {10 * beta}")
    h = 1.0 / grid_n
    f = np.asarray(curve(np.arange(grid_n + 1) * h), dtype=np.float64)
    ratio_f = float(np.max(np.abs(np.diff(f)))) / h
    ratio_d = float(np.max(np.abs(np.diff(f, n=beta)))) / h**beta
    scale = getattr(curve, "feature_scale", None)
    resolved = scale is None or scale * grid_n >= MIN_POINTS_PER_FEATURE * beta
    ok = resolved and ratio_f <= L * (1 + tol) and ratio_d <= L * (1 + tol)
    return HolderReport(int(beta), float(L), int(grid_n), ratio_f, ratio_d, bool(resolved), bool(ok), tol)


# ----------------------------------------------------------------------
POSITIVE, NEGATIVE, CROSSING = "positive", "negative", "crossing"


@dataclass(frozen=True)
class SignStructure:
    """Per-epoch sign of ``D = mu_1 - mu_0`` and distance to stationary epochs."""

    epoch_labels: tuple[str, ...]
    stationary_epochs: frozenset[int]
    stationary_distance: tuple[int | None, ...]
    layout: EpochLayout = field(repr=False, compare=False)

    def indices(self, label: str) -> list[int]:
        return [i for i, lab in enumerate(self.epoch_labels) if lab == label]


def sign_structure(instance: BanditInstance, delta: float, grid_per_epoch: int = 256) -> SignStructure:
    """Classify policy epochs by the sign of the arm-1-minus-arm-0 gap.

    Epochs are the closed normalized intervals ``[t_i / T, t_{i+1} / T]``
    of the floor-based layout.  An epoch is crossing when the gap has a
    sign change or a near-zero value (``|D| <= 1e-12 * max|D|``) on its
    grid; it is stationary when the central-difference derivative changes
    sign or is near zero at a grid node.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    if instance.k != 2:
        raise ValueError("sign structure is defined for two-armed instances")
    layout = EpochLayout.from_delta(instance.T, delta)
    mu0, mu1 = instance.arms
    T = instance.T
    grids = []
    for i in range(layout.n_epochs):
        a, b = layout.boundaries[i] / T, layout.boundaries[i + 1] / T
        grids.append(np.linspace(a, b, grid_per_epoch + 1))
    h_min = min(float(g[1] - g[0]) for g in grids)

    def gap(x):
        return np.asarray(mu1(x), dtype=np.float64) - np.asarray(mu0(x), dtype=np.float64)

    values = [gap(g) for g in grids]
    scale = max(float(np.max(np.abs(v))) for v in values)
    ztol = ZERO_RTOL * scale

    labels, stationary = [], set()
    for i, (g, v) in enumerate(zip(grids, values)):
        if np.all(v > ztol):
            labels.append(POSITIVE)
        elif np.all(v < -ztol):
            labels.append(NEGATIVE)
        else:
            labels.append(CROSSING)
        step = min(float(g[1] - g[0]), h_min)
        xl = np.clip(g - step, 0.0, 1.0)
        xr = np.clip(g + step, 0.0, 1.0)
        d = gap(xr) - gap(xl)
        dtol = ZERO_RTOL * max(scale, 1e-300)
        if np.any(np.abs(d) <= dtol) or (np.min(d) < 0 < np.max(d)):
            stationary.add(i)

    dist: list[int | None] = []
    st = sorted(stationary)
    for i in range(layout.n_epochs):
        dist.append(min(abs(i - s) for s in st) if st else None)
    return SignStructure(tuple(labels), frozenset(stationary), tuple(dist), layout)


def sample_curve_csv_rows(curve, resolution: int) -> list[tuple[float, float]]:
    xs = np.linspace(0.0, 1.0, resolution + 1)
    return list(zip(xs.tolist(), np.asarray(curve(xs), dtype=np.float64).tolist()))
