"""Command-line driver.

Every subcommand reads a JSON config (single positional path), writes its
result to ``--out`` (stdout if omitted) and exits with 0 on success, 2 on a
configuration error and 3 on a numeric failure or a failed verification.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .adversary import AdversaryConfig, greedy_adversary
from .construction import FamilySpec, family_curve, verify_construction
from .engine import MAX_SCAN_T, clean_event_frequency
from .experiments import SweepConfig, fit_by_policy, read_csv, run_sweep, rows_to_csv
from .policies import PolicySpec
from .rewards import certify_holder, curve_from_dict, sample_curve_csv_rows

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(Exception):
    pass


class NumericFailure(Exception):
    pass


def _load(path: str | None, allowed: set[str], required: set[str] = frozenset()) -> dict[str, Any]:
    if path is None:
        cfg: dict[str, Any] = {}
    else:
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError(f"{path} must hold a JSON object")
    extra = set(cfg) - allowed
    if extra:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
    missing = required - set(cfg)
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(sorted(missing))}")
    return cfg


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _configure(build: Callable[[], Any]):
    """Run a config-building step, mapping validation errors to ``ConfigError``."""
    try:
        return build()
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from None


# ----------------------------------------------------------------------
def cmd_sweep(args) -> int:
    raw = _load(args.config, set(SweepConfig.KEYS))
    if args.seed is not None:
        raw["master_seed"] = args.seed
    if args.out is not None:
        raw["output"] = args.out
    if args.svg is not None:
        raw["svg"] = args.svg
    cfg = _configure(lambda: SweepConfig.from_dict(raw))
    rows = run_sweep(cfg, workers=args.workers)
    if cfg.output is None:
        sys.stdout.write(rows_to_csv(rows))
    return EXIT_OK


def cmd_slope(args) -> int:
    try:
        rows = read_csv(args.config)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from None
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"malformed sweep CSV: {exc}") from None
    try:
        fits = fit_by_policy(rows)
    except ValueError as exc:
        raise NumericFailure(str(exc)) from None
    out = [{"policy": p, "slope": f.slope, "intercept": f.intercept, "r_squared": f.r_squared} for p, f in fits.items()]
    _emit(_dump(out), args.out)
    return EXIT_OK


ADVERSARY_KEYS = {"beta", "T", "policy", "rollouts_per_decision", "master_seed", "final_trials"}


def cmd_adversary(args) -> int:
    raw = _load(args.config, ADVERSARY_KEYS, {"beta", "T", "policy"})
    if args.seed is not None:
        raw["master_seed"] = args.seed

    def build():
        pol = raw["policy"]
        if not isinstance(pol, dict):
            raise ValueError("'policy' must be a JSON object such as {\"policy\": \"fixed\", \"arm\": 1}")
        kw = {k: raw[k] for k in ("rollouts_per_decision", "master_seed", "final_trials") if k in raw}
        return PolicySpec.from_dict(pol), AdversaryConfig(int(raw["beta"]), int(raw["T"]), **kw)

    policy, adv = _configure(build)
    result = greedy_adversary(policy, adv, workers=args.workers)
    if not math.isfinite(result.estimated_regret):
        raise NumericFailure("non-finite regret estimate")
    _emit(_dump(result.to_dict()), args.out)
    return EXIT_OK


CONSTRUCT_KEYS = {"beta", "T", "colors", "resolution"}


def cmd_construct(args) -> int:
    raw = _load(args.config, CONSTRUCT_KEYS)
    for key in ("beta", "T", "colors", "resolution"):
        v = getattr(args, key)
        if v is not None:
            raw[key] = v
    missing = {"beta", "T"} - set(raw)
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(sorted(missing))}")

    def build():
        spec = FamilySpec.build(int(raw["beta"]), int(raw["T"]), raw.get("colors"))
        res = int(raw.get("resolution", 4096))
        if res < 2:
            raise ValueError("resolution must be >= 2")
        return spec, res

    spec, res = _configure(build)
    curve = family_curve(spec)
    construction = verify_construction(spec.beta, 2.0 * spec.delta)
    grid_n = max(10 * spec.beta, 4 * math.ceil(8 * spec.beta / curve.feature_scale))
    holder = certify_holder(curve, spec.beta, 1.0, grid_n)
    report = {
        "beta": spec.beta, "T": spec.T, "delta": spec.delta, "m": spec.m,
        "colors": str(spec.colors), "height": spec.height, "c_beta": spec.c_beta,
        "construction": construction.to_dict(), "holder": holder.to_dict(),
        "pass": construction.passed and holder.passed,
    }
    lines = ["x,value"] + [f"{x!r},{v!r}" for x, v in sample_curve_csv_rows(curve, res)]
    _emit("\n".join(lines) + "\n", args.out)
    report_path = args.report or (None if args.out is None else str(Path(args.out).with_suffix(".verify.json")))
    if report_path is None:
        sys.stderr.write(_dump(report))
    else:
        Path(report_path).write_text(_dump(report))
    return EXIT_OK if report["pass"] else EXIT_NUMERIC


CERTIFY_KEYS = {"curve", "beta", "L", "grid_n", "tol"}


def cmd_certify(args) -> int:
    raw = _load(args.config, CERTIFY_KEYS, {"curve", "beta", "L", "grid_n"})

    def build():
        curve = curve_from_dict(raw["curve"])
        kw = {"tol": float(raw["tol"])} if "tol" in raw else {}
        return curve, int(raw["beta"]), float(raw["L"]), int(raw["grid_n"]), kw

    curve, beta, L, grid_n, kw = _configure(build)
    report = _configure(lambda: certify_holder(curve, beta, L, grid_n, **kw))
    _emit(_dump(report.to_dict()), args.out)
    return EXIT_OK if report.passed else EXIT_NUMERIC


CLEAN_KEYS = {"mu", "T", "n_trials", "master_seed"}


def cmd_clean_scan(args) -> int:
    raw = _load(args.config, CLEAN_KEYS, {"T", "n_trials"})
    if args.seed is not None:
        raw["master_seed"] = args.seed

    def build():
        mu, T, n = float(raw.get("mu", 0.0)), int(raw["T"]), int(raw["n_trials"])
        if not -1 <= mu <= 1:
            raise ValueError("mu must lie in [-1, 1]")
        if not 2 <= T <= MAX_SCAN_T:
            raise ValueError(f"T must lie in [2, {MAX_SCAN_T}]")
        if n < 1:
            raise ValueError("n_trials must be >= 1")
        return mu, T, n, int(raw.get("master_seed", 0))

    mu, T, n, seed = _configure(build)
    freq = clean_event_frequency(mu, T, n, seed, workers=args.workers)
    out = {
        "mu": mu, "T": T, "n_trials": n, "master_seed": seed,
        "upper_trials": freq.upper_trials, "two_sided_trials": freq.two_sided_trials,
        "upper_fraction": freq.upper_fraction, "fraction": freq.fraction,
    }
    _emit(_dump(out), args.out)
    return EXIT_OK


# ----------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="smoothbandits", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, config_help="JSON config file", config_optional=False):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config", nargs="?" if config_optional else None, help=config_help)
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.set_defaults(func=fn)
        return sp

    sp = add("sweep", cmd_sweep, "regret sweep over horizons; writes CSV")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--svg", help="also write a log-log SVG plot")
    sp.add_argument("--workers", type=int)

    add("slope", cmd_slope, "fit log-log slopes per policy", config_help="sweep CSV")

    sp = add("adversary", cmd_adversary, "greedy red/bowl adversary against a policy")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)

    sp = add("construct", cmd_construct, "build and verify a lower-bound family curve", config_optional=True)
    sp.add_argument("--beta", type=int)
    sp.add_argument("--T", type=int)
    sp.add_argument("--colors", help="red/bowl string such as rbrb (default all red)")
    sp.add_argument("--resolution", type=int, help="sample intervals in the curve CSV")
    sp.add_argument("--report", help="verification JSON path (default: <out>.verify.json)")

    add("certify", cmd_certify, "finite-difference Hölder certification of a curve")

    sp = add("clean-scan", cmd_clean_scan, "clean-event violation frequency on a constant-mean stream")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericFailure, ArithmeticError, ValueError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
