import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ols
from smoothbandits.experiments import (
    CSV_COLUMNS,
    STYLES,
    SweepConfig,
    SweepRow,
    fit_by_policy,
    fit_slope,
    policy_for,
    read_csv,
    render_svg,
    rows_to_csv,
    run_sweep,
    write_csv,
)

SMALL = SweepConfig(horizons=(256, 512, 1024), policies=("nonsmooth", "smooth", "oracle"), instances_per_T=4)


def row(T, reg, policy="p"):
    return SweepRow(policy, T, 1.0, 0.5, 10, reg, 0.1)


def test_row_cardinality_and_columns():
    rows = run_sweep(SMALL)
    assert len(rows) == 3 * 3
    assert {(r.policy, r.T) for r in rows} == {(p, T) for p in SMALL.policies for T in SMALL.horizons}
    assert rows_to_csv(rows).splitlines()[0] == ",".join(CSV_COLUMNS)


def test_oracle_rows_are_zero():
    for r in run_sweep(SMALL):
        if r.policy == "oracle":
            assert r.mean_regret == 0.0 and r.B is None and r.Delta is None
        else:
            assert r.mean_regret > 0


def test_sweep_bytes_deterministic(tmp_path):
    a, b, c = (tmp_path / n for n in "abc")
    run_sweep(SweepConfig(**{**SMALL.__dict__, "output": str(a)}), workers=1)
    run_sweep(SweepConfig(**{**SMALL.__dict__, "output": str(b)}), workers=3)
    run_sweep(SweepConfig(**{**SMALL.__dict__, "output": str(c), "master_seed": 1}), workers=1)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_adding_a_horizon_keeps_other_rows():
    base = {(r.policy, r.T): r for r in run_sweep(SMALL)}
    more = run_sweep(SweepConfig((256, 512, 1024, 2048), SMALL.policies, 4))
    for r in more:
        if r.T != 2048:
            assert base[(r.policy, r.T)] == r


def test_csv_round_trip(tmp_path):
    rows = run_sweep(SMALL)
    p = tmp_path / "s.csv"
    write_csv(rows, str(p))
    assert read_csv(str(p)) == rows


def test_csv_bad_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("policy,T\nx,1\n")
    with pytest.raises(ValueError):
        read_csv(str(p))


def test_unwritable_path_fails_fast(tmp_path):
    # a directory cannot be opened for writing, even by root
    with pytest.raises(OSError):
        run_sweep(SweepConfig(**{**SMALL.__dict__, "output": str(tmp_path)}))


def test_missing_directory_fails_fast(tmp_path):
    with pytest.raises(OSError):
        run_sweep(SweepConfig(**{**SMALL.__dict__, "output": str(tmp_path / "no" / "x.csv")}))


def test_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(horizons=(512, 256))
    with pytest.raises(ValueError):
        SweepConfig(horizons=(256,), policies=("nope",))
    with pytest.raises(ValueError):
        SweepConfig.from_dict({"horizons": [256], "colour": 1})
    with pytest.raises(ValueError):
        SweepConfig(horizons=(256,), instances_per_T=1)


def test_default_grid():
    assert SweepConfig().horizons == tuple(2**j for j in range(14, 21))
    assert SweepConfig.from_dict({}).policies == ("nonsmooth", "smooth")


def test_policy_styles():
    for style in STYLES:
        spec, _ = policy_for(style, 4096)
        assert spec.label == style
    with pytest.raises(ValueError):
        policy_for("unknown", 4096)


# -- slopes ---------------------------------------------------------------
def test_exact_power_law():
    rows = [row(2**k, 3.0 * 2 ** (0.75 * k)) for k in range(10, 16)]
    f = fit_slope(rows)
    assert f.slope == pytest.approx(0.75, abs=1e-12)
    assert f.intercept == pytest.approx(math.log2(3.0), abs=1e-12)
    assert f.r_squared == pytest.approx(1.0)


@settings(max_examples=30)
@given(st.lists(st.floats(1.0, 1e6), min_size=3, max_size=8), st.randoms(use_true_random=False))
def test_slope_matches_scipy_and_is_order_invariant(regs, rnd):
    rows = [row(2 ** (8 + i), r) for i, r in enumerate(regs)]
    f = fit_slope(rows)
    s, b, r2 = ols(np.log2([r.T for r in rows]), np.log2(regs))
    assert f.slope == pytest.approx(s, abs=1e-9)
    assert f.intercept == pytest.approx(b, abs=1e-7)
    shuffled = rows[:]
    rnd.shuffle(shuffled)
    assert fit_slope(shuffled) == f


def test_slope_errors():
    with pytest.raises(ValueError, match="at least 3"):
        fit_slope([row(256, 1.0), row(512, 2.0)])
    with pytest.raises(ValueError, match="T=512"):
        fit_slope([row(256, 1.0), row(512, 0.0), row(1024, 2.0)])
    with pytest.raises(ValueError):
        fit_slope([row(256, 1.0)] * 3)


def test_fit_by_policy_groups():
    rows = [row(2**k, 2.0**k, "a") for k in range(8, 11)] + [row(2**k, 2.0 ** (k / 2), "b") for k in range(8, 11)]
    fits = fit_by_policy(rows)
    assert fits["a"].slope == pytest.approx(1.0) and fits["b"].slope == pytest.approx(0.5)


def test_svg_contains_points_and_fit():
    rows = [row(2**k, 2.0 ** (0.7 * k), "a") for k in range(8, 12)]
    svg = render_svg(rows)
    assert svg.startswith("<svg") and svg.count("<circle") == 4 and "slope 0.700" in svg
