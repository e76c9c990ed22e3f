"""Bowl-shaped reward curves and the adversarial family built from them.

Everything here is exact piecewise-polynomial arithmetic on
:class:`~smoothbandits.piecewise.PiecewisePoly`:

* ``pyramid(w)`` is the tent ``min(x, w - x)`` on ``[0, w]``;
* ``flock(h, v)`` lays ``v_i``-weighted copies of ``h`` side by side;
* ``anti_derivative(f, l)`` integrates ``l`` times, each level vanishing at 0;
* ``bump(beta, eps)`` integrates a neutral pyramid flock ``beta - 1`` times,
  giving a monotone transition of height ``C_beta * eps**beta`` whose first
  ``beta - 1`` derivatives vanish at both ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Iterable, Sequence

import numpy as np

from .piecewise import MAX_DEGREE, PiecewisePoly, concatenate, integrate_rows
from .rewards import PiecewiseCurve

MAX_VERIFY_BETA = 8
VERIFY_GRID = 10_000


def pyramid(w: float) -> PiecewisePoly:
    """Continuous tent ``min(x, w - x)`` on ``[0, w]``."""
    if not w > 0:
        raise ValueError(f"pyramid width must be positive, got {w}")
    half = 0.5 * w
    return PiecewisePoly(np.array([0.0, half, w]), np.array([[0.0, 1.0], [half, -1.0]]))


@dataclass(frozen=True)
class NeutralVec:
    k: int
    entries: tuple[int, ...]

    def block_sums(self, level: int) -> np.ndarray:
        a = np.asarray(self.entries, dtype=np.int64)
        return a.reshape(-1, 2**level).sum(axis=1)

    def is_neutral(self) -> bool:
        return all(not np.any(self.block_sums(i)) for i in range(1, self.k + 1))

    def __len__(self):
        return len(self.entries)


def neutralizing_vector(k: int) -> NeutralVec:
    """``nu^0 = [1]``, ``nu^k = nu^(k-1) + (-nu^(k-1))`` (concatenation)."""
    if not 0 <= k <= 30:
        raise ValueError("k must lie in [0, 30]")
    v = np.ones(1, dtype=np.int8)
    for _ in range(k):
        v = np.concatenate([v, -v])
    return NeutralVec(k, tuple(int(e) for e in v))


def flock(h: PiecewisePoly, v: NeutralVec | Sequence[float]) -> PiecewisePoly:
    """Side-by-side copies: cell ``i`` (0-based) holds ``v_i * h(x - i*w)``.

    The result is continuous when ``h`` vanishes at both ends; otherwise the
    cell joins carry jumps, which are kept.
    """
    weights = v.entries if isinstance(v, NeutralVec) else tuple(v)
    if not weights:
        raise ValueError("weight vector must be nonempty")
    w = h.span
    parts = [(i * w, h.scaled(float(wi))) for i, wi in enumerate(weights)]
    ends = h.node_values()[[0, -1]]
    continuous = h.max_jump() == 0 and (len(weights) == 1 or not np.any(ends))
    return concatenate(parts, len(weights) * w, check_continuity=continuous)


def anti_derivative(f: PiecewisePoly, l: int) -> PiecewisePoly:
    """Level-``l`` anti-derivative; every level vanishes at 0, breakpoints are kept."""
    if l < 0:
        raise ValueError("level must be >= 0")
    if f.degree + l > MAX_DEGREE:
        raise ValueError(f"degree {f.degree + l} would exceed cap {MAX_DEGREE}")
    c = f.coeffs
    widths = f.widths
    for _ in range(l):
        ic = integrate_rows(c)
        ends = np.zeros(ic.shape[0])
        for d in range(ic.shape[1] - 1, -1, -1):
            ends = ends * widths + ic[:, d]
        ic[:, 0] = np.concatenate([[0.0], np.cumsum(ends)[:-1]])
        c = ic
    return PiecewisePoly(f.breakpoints, c, check_continuity=False)


@lru_cache(maxsize=256)
def bump(beta: int, eps: float) -> PiecewisePoly:
    """Monotone transition ``g_eps`` on ``[0, eps]``.

    ``beta >= 2``: the ``(beta-2)``-neutral flock of pyramids of width
    ``2**-(beta-2) * eps`` integrated ``beta - 1`` times.  It is built once at
    ``eps = 1`` and rescaled, which keeps relative precision when
    ``eps**beta`` is tiny.  ``beta == 1``:
    the ramp ``g(x) = x``.
    """
    if beta < 1:
        raise ValueError("beta must be >= 1")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if beta == 1:
        return PiecewisePoly(np.array([0.0, eps]), np.array([[0.0, 1.0]]))
    unit = _unit_bump(beta)
    # g_eps(x) = eps^beta g_1(x / eps); in local coordinates c_d -> c_d eps^(beta - d)
    powers = float(eps) ** (beta - np.arange(unit.coeffs.shape[1]))
    return PiecewisePoly(unit.breakpoints * eps, unit.coeffs * powers, check_continuity=False)


@lru_cache(maxsize=None)
def _unit_bump(beta: int) -> PiecewisePoly:
    w = 1.0 / 2 ** (beta - 2)
    return anti_derivative(flock(pyramid(w), neutralizing_vector(beta - 2)), beta - 1)


def growth_constant(beta: int, eps: float = 1.0) -> float:
    """``C_beta = g_eps(eps) / eps**beta`` (independent of ``eps`` by homogeneity)."""
    g = bump(beta, float(eps))
    return float(g(g.span)) / eps**beta


def delta_for(beta: int, T: int) -> float:
    """Epoch scale ``(2^(2(beta+1)) C_beta^2 T)^(-1/(2 beta + 1))`` of the family."""
    if T < 1:
        raise ValueError("T must be >= 1")
    c = growth_constant(beta)
    delta = (2.0 ** (2 * (beta + 1)) * c * c * T) ** (-1.0 / (2 * beta + 1))
    if delta >= 1.0 / 6.0:
        raise ValueError(
            f"delta({beta}, {T}) = {delta:.4f} >= 1/6 leaves no full epoch; use a larger T"
        )
    return delta


# ----------------------------------------------------------------------
RED, BOWL = "r", "b"


@dataclass(frozen=True)
class ColorSeq:
    entries: tuple[str, ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("color sequence must be nonempty")
        bad = [e for e in self.entries if e not in (RED, BOWL)]
        if bad:
            raise ValueError(f"colors must be 'r' (red) or 'b' (bowl), got {bad[:3]}")

    @classmethod
    def parse(cls, colors: "str | Iterable[str] | ColorSeq") -> "ColorSeq":
        if isinstance(colors, ColorSeq):
            return colors
        alias = {"r": RED, "red": RED, "b": BOWL, "bowl": BOWL, "blue": BOWL}
        items = list(colors) if isinstance(colors, str) else [str(c) for c in colors]
        try:
            return cls(tuple(alias[c.lower()] for c in items))
        except KeyError as exc:
            raise ValueError(f"unknown color {exc.args[0]!r}") from None

    def __str__(self):
        return "".join(self.entries)

    def __len__(self):
        return len(self.entries)

    def __add__(self, other: "ColorSeq | str") -> "ColorSeq":
        return ColorSeq(self.entries + ColorSeq.parse(other).entries)


@dataclass(frozen=True)
class FamilySpec:
    beta: int
    T: int
    delta: float
    m: int
    colors: ColorSeq
    c_beta: float

    def __post_init__(self):
        if self.m != math.floor(1.0 / (6.0 * self.delta)):
            raise ValueError("m must equal floor(1/(6 delta))")
        if len(self.colors) != self.m:
            raise ValueError(f"need {self.m} colors for beta={self.beta}, T={self.T}; got {len(self.colors)}")

    @classmethod
    def build(cls, beta: int, T: int, colors: "str | Iterable[str] | ColorSeq | None" = None) -> "FamilySpec":
        """Spec with ``delta = delta_for(beta, T)``; ``colors=None`` means all red."""
        delta = delta_for(beta, T)
        m = math.floor(1.0 / (6.0 * delta))
        cs = ColorSeq((RED,) * m) if colors is None else ColorSeq.parse(colors)
        return cls(beta, T, delta, m, cs, growth_constant(beta))

    @property
    def height(self) -> float:
        """Red level ``1/2 C_beta (2 delta)^beta``; the bowl bottom is its negative."""
        return 0.5 * self.c_beta * (2.0 * self.delta) ** self.beta

    def epoch_edges(self) -> np.ndarray:
        return 6.0 * self.delta * np.arange(self.m + 1)

    def with_colors(self, colors) -> "FamilySpec":
        return FamilySpec(self.beta, self.T, self.delta, self.m, ColorSeq.parse(colors), self.c_beta)


@dataclass(frozen=True, eq=False)
class FamilyCurve(PiecewiseCurve):
    spec: FamilySpec = field(default=None)
    kind = "family"

    @property
    def feature_scale(self):
        s = self.spec
        return 2.0 * s.delta / 2 ** max(s.beta - 2, 0)

    def to_dict(self):
        return {"kind": "family", "beta": self.spec.beta, "T": self.spec.T, "colors": str(self.spec.colors)}


def bowl_pieces(beta: int, delta: float) -> list[tuple[float, PiecewisePoly]]:
    """Descend / flat / ascend pieces of one bowl epoch, offsets relative to the epoch start."""
    g = bump(beta, 2.0 * delta)
    h = 0.5 * float(g(g.span))
    down = g.scaled(-1.0).shifted_value(h)
    flat = PiecewisePoly.constant(-h, 2.0 * delta)
    up = g.shifted_value(-h)
    return [(0.0, down), (2.0 * delta, flat), (4.0 * delta, up)]


def family_curve(spec: FamilySpec) -> FamilyCurve:
    """The member ``mu_v`` of the adversarial family selected by ``spec.colors``."""
    g = bump(spec.beta, 2.0 * spec.delta)
    h = 0.5 * float(g(g.span))
    edges = spec.epoch_edges()
    parts: list[tuple[float, PiecewisePoly]] = []
    for j, color in enumerate(spec.colors.entries):
        x0 = float(edges[j])
        if color == RED:
            parts.append((x0, PiecewisePoly.constant(h, 6.0 * spec.delta)))
        else:
            parts.extend((x0 + off, piece) for off, piece in bowl_pieces(spec.beta, spec.delta))
    tail = float(edges[-1])
    if 1.0 - tail > 1e-12:
        parts.append((tail, PiecewisePoly.constant(h, 1.0 - tail)))
    poly = concatenate(parts, 1.0)
    return FamilyCurve(poly, spec)


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ConstructionReport:
    beta: int
    eps: float
    g_eps: float
    growth_constant: float
    endpoint_derivatives: tuple[tuple[int, float, float], ...]
    min_g_prime: float
    lipschitz_top: float
    endpoints_ok: bool
    monotone_ok: bool
    lipschitz_ok: bool
    neutral_ok: bool

    @property
    def passed(self) -> bool:
        return self.endpoints_ok and self.monotone_ok and self.lipschitz_ok and self.neutral_ok

    def to_dict(self) -> dict[str, Any]:
        return {
            "beta": self.beta,
            "eps": self.eps,
            "g_eps": self.g_eps,
            "growth_constant": self.growth_constant,
            "endpoint_derivatives": [
                {"order": j, "at_0": a, "at_eps": b} for j, a, b in self.endpoint_derivatives
            ],
            "min_g_prime": self.min_g_prime,
            "lipschitz_top": self.lipschitz_top,
            "endpoints_ok": self.endpoints_ok,
            "monotone_ok": self.monotone_ok,
            "lipschitz_ok": self.lipschitz_ok,
            "neutral_ok": self.neutral_ok,
            "pass": self.passed,
        }


def verify_construction(beta: int, eps: float, tol: float = 1e-10) -> ConstructionReport:
    """Check vanishing endpoint derivatives, monotonicity, the unit Lipschitz
    top derivative and neutrality of the flock weights for ``bump(beta, eps)``."""
    if not 1 <= beta <= MAX_VERIFY_BETA:
        raise ValueError(f"beta must lie in [1, {MAX_VERIFY_BETA}]")
    g = bump(beta, float(eps))
    g_eps = float(g(g.span))
    derivs = []
    for j in range(1, beta):
        dj = g.derivative(j)
        derivs.append((j, float(dj(0.0)), float(dj(g.span))))
    # the j-th derivative scales like g(eps) / eps**j
    worst = max((max(abs(a), abs(b)) * eps**j for j, a, b in derivs), default=0.0)
    xs = np.linspace(0.0, g.span, VERIFY_GRID + 1)
    min_gp = float(np.min(g.derivative(1)(xs)))
    lip = g.derivative(beta - 1).lipschitz()
    neutral = neutralizing_vector(beta - 2).is_neutral() if beta >= 2 else True
    return ConstructionReport(
        beta=beta,
        eps=float(eps),
        g_eps=g_eps,
        growth_constant=g_eps / eps**beta,
        endpoint_derivatives=tuple(derivs),
        min_g_prime=min_gp,
        lipschitz_top=lip,
        endpoints_ok=worst <= tol * g_eps,
        monotone_ok=min_gp >= -tol,
        lipschitz_ok=abs(lip - 1.0) <= tol,
        neutral_ok=neutral,
    )
