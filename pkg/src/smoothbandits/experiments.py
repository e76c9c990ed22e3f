"""Horizon sweeps on random sinusoidal instances, CSV I/O, slope fits and an SVG plot."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .engine import MonteCarloResult, RunConfig, map_ordered, run_episode, trial_rng
from .policies import PolicySpec, default_params
from .rewards import gap_reduction, sample_sinusoidal_instance

DEFAULT_HORIZONS = tuple(2**j for j in range(14, 21))
CSV_COLUMNS = ("policy", "T", "B", "Delta", "n_trials", "mean_regret", "stderr")

# style -> (policy kind, beta, schedule style, play on the one-armed gap instance?)
STYLES: dict[str, tuple[str, int, str, bool]] = {
    "nonsmooth": ("be1", 1, "experiment", True),
    "smooth": ("be1", 2, "experiment", True),
    "theory-beta1": ("be1", 1, "theoretical", True),
    "theory-beta2": ("be1", 2, "theoretical", True),
    "be2-nonsmooth": ("be2", 1, "experiment", False),
    "be2-smooth": ("be2", 2, "experiment", False),
    "oracle": ("oracle", 0, "", False),
}


def policy_for(style: str, T: int) -> tuple[PolicySpec, bool]:
    try:
        kind, beta, sched, reduce = STYLES[style]
    except KeyError:
        raise ValueError(f"unknown policy style {style!r}; choose from {sorted(STYLES)}") from None
    if kind == "oracle":
        return PolicySpec("oracle", label=style), reduce
    return PolicySpec.be(default_params(beta, T, style=sched), kind, label=style), reduce


def horizon_seed(master_seed: int, T: int) -> int:
    """64-bit seed for all trials at horizon ``T`` (no noise sharing across horizons)."""
    return int(np.random.SeedSequence([int(master_seed), int(T)]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SweepConfig:
    horizons: tuple[int, ...] = DEFAULT_HORIZONS
    policies: tuple[str, ...] = ("nonsmooth", "smooth")
    instances_per_T: int = 100
    master_seed: int = 0
    output: str | None = None
    trials_per_instance: int = 1
    svg: str | None = None

    def __post_init__(self):
        hs = tuple(int(t) for t in self.horizons)
        object.__setattr__(self, "horizons", hs)
        object.__setattr__(self, "policies", tuple(self.policies))
        if not hs or any(b <= a for a, b in zip(hs, hs[1:])):
            raise ValueError("horizons must be nonempty and strictly increasing")
        if self.instances_per_T < 2:
            raise ValueError("instances_per_T must be >= 2")
        if self.trials_per_instance < 1:
            raise ValueError("trials_per_instance must be >= 1")
        for s in self.policies:
            if s not in STYLES:
                raise ValueError(f"unknown policy style {s!r}; choose from {sorted(STYLES)}")

    KEYS = ("horizons", "policies", "instances_per_T", "master_seed", "output", "trials_per_instance", "svg")

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SweepConfig":
        extra = set(d) - set(cls.KEYS)
        if extra:
            raise ValueError(f"unknown sweep config keys: {sorted(extra)}")
        return cls(**d)


@dataclass(frozen=True)
class SweepRow:
    policy: str
    T: int
    B: float | None
    Delta: float | None
    n_trials: int
    mean_regret: float
    stderr: float | None

    def cells(self) -> list[str]:
        f = lambda v: "" if v is None else repr(float(v))
        return [self.policy, str(self.T), f(self.B), f(self.Delta), str(self.n_trials),
                f(self.mean_regret), f(self.stderr)]

    @classmethod
    def parse(cls, rec: dict[str, str]) -> "SweepRow":
        g = lambda k: None if rec[k] == "" else float(rec[k])
        return cls(rec["policy"], int(rec["T"]), g("B"), g("Delta"), int(rec["n_trials"]),
                   float(rec["mean_regret"]), g("stderr"))


def check_writable(path: str):
    """Fail fast on an unwritable output path (creates the file if missing)."""
    with open(path, "a"):
        pass


def run_sweep(config: SweepConfig, workers: int | None = None) -> list[SweepRow]:
    for p in (config.output, config.svg):
        if p:
            check_writable(p)
    specs = {(style, T): policy_for(style, T) for T in config.horizons for style in config.policies}
    n = config.trials_per_instance

    def instance_task(key):
        # build, run and drop one instance so its cached means table is freed
        T, i = key
        raw = sample_sinusoidal_instance(trial_rng(config.master_seed, T, i), T)
        reduced = None
        seed = horizon_seed(config.master_seed, T)
        out = []
        for style in config.policies:
            spec, reduce = specs[(style, T)]
            if reduce and reduced is None:
                reduced = gap_reduction(raw)
            inst = reduced if reduce else raw
            out.append([run_episode(RunConfig(seed, i * n + k, inst, spec)).mean_regret for k in range(n)])
        return out

    keys = [(T, i) for T in config.horizons for i in range(config.instances_per_T)]
    results = dict(zip(keys, map_ordered(instance_task, keys, workers)))
    rows = []
    for T in config.horizons:
        for j, style in enumerate(config.policies):
            spec = specs[(style, T)][0]
            vals = [v for i in range(config.instances_per_T) for v in results[(T, i)][j]]
            mc = MonteCarloResult.from_values(vals)
            rows.append(SweepRow(style, T, spec.B, spec.Delta, len(vals), mc.mean, mc.stderr))
    if config.output:
        write_csv(rows, config.output)
    if config.svg:
        write_svg(rows, config.svg)
    return rows


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def write_csv(rows: Iterable[SweepRow], path: str):
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))


def read_csv(path: str) -> list[SweepRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"expected CSV columns {','.join(CSV_COLUMNS)}, got {reader.fieldnames}")
        return [SweepRow.parse(rec) for rec in reader]


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float


def fit_slope(rows: Sequence[SweepRow]) -> SlopeFit:
    """OLS of ``log2 mean_regret`` on ``log2 T``."""
    if len(rows) < 3:
        raise ValueError("need at least 3 rows to fit a slope")
    for r in rows:
        if not r.mean_regret > 0:
            raise ValueError(f"nonpositive mean_regret {r.mean_regret} in row policy={r.policy}, T={r.T}")
    ordered = sorted(rows, key=lambda r: (r.T, r.mean_regret))
    x = np.log2([r.T for r in ordered])
    y = np.log2([r.mean_regret for r in ordered])
    xc, yc = x - x.mean(), y - y.mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise ValueError("all rows share one horizon; slope undefined")
    slope = float(xc @ yc) / sxx
    intercept = float(y.mean() - slope * x.mean())
    ss_tot = float(yc @ yc)
    resid = y - (intercept + slope * x)
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(resid @ resid) / ss_tot
    return SlopeFit(slope, intercept, r2)


def fit_by_policy(rows: Sequence[SweepRow]) -> dict[str, SlopeFit]:
    groups: dict[str, list[SweepRow]] = {}
    for r in rows:
        groups.setdefault(r.policy, []).append(r)
    return {p: fit_slope(g) for p, g in sorted(groups.items())}


# ----------------------------------------------------------------------
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def render_svg(rows: Sequence[SweepRow], width: int = 640, height: int = 440) -> str:
    """Log-log scatter of mean regret against T, one color per policy, with OLS lines."""
    pts = [r for r in rows if r.mean_regret > 0]
    if not pts:
        raise ValueError("nothing positive to plot on log axes")
    lx = np.log2([r.T for r in pts])
    ly = np.log2([r.mean_regret for r in pts])
    pad = 60
    x0, x1 = lx.min() - 0.5, lx.max() + 0.5
    y0, y1 = ly.min() - 0.5, ly.max() + 0.5
    sx = lambda v: pad + (v - x0) / (x1 - x0) * (width - 2 * pad)
    sy = lambda v: height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="{height - 20}" text-anchor="middle">log2 T</text>',
        f'<text x="18" y="{height / 2:.0f}" transform="rotate(-90 18 {height / 2:.0f})" text-anchor="middle">log2 mean regret</text>',
    ]
    for v in range(math.ceil(x0), math.floor(x1) + 1):
        out.append(f'<text x="{sx(v):.1f}" y="{height - pad + 16}" text-anchor="middle">{v}</text>')
    for v in range(math.ceil(y0), math.floor(y1) + 1):
        out.append(f'<text x="{pad - 8}" y="{sy(v) + 4:.1f}" text-anchor="end">{v}</text>')
    groups: dict[str, list[SweepRow]] = {}
    for r in pts:
        groups.setdefault(r.policy, []).append(r)
    for n, (name, g) in enumerate(sorted(groups.items())):
        color = _PALETTE[n % len(_PALETTE)]
        for r in g:
            out.append(f'<circle cx="{sx(math.log2(r.T)):.1f}" cy="{sy(math.log2(r.mean_regret)):.1f}" r="4" fill="{color}"/>')
        label = name
        if len(g) >= 3 and len({r.T for r in g}) > 1:
            fit = fit_slope(g)
            a, b = math.log2(min(r.T for r in g)), math.log2(max(r.T for r in g))
            out.append(
                f'<line x1="{sx(a):.1f}" y1="{sy(fit.intercept + fit.slope * a):.1f}" '
                f'x2="{sx(b):.1f}" y2="{sy(fit.intercept + fit.slope * b):.1f}" stroke="{color}"/>'
            )
            label = f"{name} (slope {fit.slope:.3f})"
        out.append(f'<text x="{pad + 10}" y="{pad + 16 * (n + 1)}" fill="{color}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(rows: Sequence[SweepRow], path: str):
    with open(path, "w") as fh:
        fh.write(render_svg(rows))
