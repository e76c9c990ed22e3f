"""Simulation toolkit for smooth non-stationary bandits.

Budgeted Exploration policies, Hölder reward instances, the red/bowl
lower-bound family, regret experiments and their numerical checks.
"""

__version__ = "0.1.0"

from .adversary import AdversaryConfig, epoch_distinguishability, greedy_adversary, kl_pm1, lb_value, pinsker_gap
from .construction import (
    ColorSeq,
    FamilySpec,
    anti_derivative,
    bump,
    delta_for,
    family_curve,
    flock,
    growth_constant,
    neutralizing_vector,
    pyramid,
    verify_construction,
)
from .engine import RegretReport, RunConfig, clean_event_scan, draw_reward, monte_carlo, run_episode, wald_probe
from .experiments import SlopeFit, SweepConfig, fit_slope, run_sweep
from .layout import EpochLayout
from .piecewise import PiecewisePoly
from .policies import BEConfig, PolicySpec, default_params, fixed_arm, oracle_policy
from .rewards import (
    BanditInstance,
    ConstantCurve,
    PiecewiseCurve,
    SinusoidalCurve,
    certify_holder,
    eval_mean,
    gap_reduction,
    sample_sinusoidal_instance,
    sign_structure,
)

__all__ = [
    "AdversaryConfig", "BEConfig", "BanditInstance", "ColorSeq", "ConstantCurve", "EpochLayout",
    "FamilySpec", "PiecewiseCurve", "PiecewisePoly", "PolicySpec", "RegretReport", "RunConfig",
    "SinusoidalCurve", "SlopeFit", "SweepConfig", "anti_derivative", "bump", "certify_holder",
    "clean_event_scan", "default_params", "delta_for", "draw_reward", "epoch_distinguishability",
    "eval_mean", "family_curve", "fit_slope", "fixed_arm", "flock", "gap_reduction",
    "greedy_adversary", "growth_constant", "kl_pm1", "lb_value", "monte_carlo",
    "neutralizing_vector", "oracle_policy", "pinsker_gap", "pyramid", "run_episode", "run_sweep",
    "sample_sinusoidal_instance", "sign_structure", "verify_construction", "wald_probe",
]
