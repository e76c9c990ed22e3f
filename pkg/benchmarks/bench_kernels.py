"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--T 65536] [--repeats 5]

Both backends are loaded in one process; the numba kernels are warmed up
before timing.  Each line reports the best wall time per call and the
speedup of numba over numpy.
"""

import argparse
import math
import time

import numpy as np

from smoothbandits.kernels import BACKENDS
from smoothbandits.layout import EpochLayout
from smoothbandits.rewards import BanditInstance, ConstantCurve, SinusoidalCurve


def best_time(fn, repeats):
    out = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        out = min(out, time.perf_counter() - t0)
    return out


def cases(T, rng):
    curve = SinusoidalCurve(0.02, 3.7, 0.4, offset=0.0)
    one = np.ascontiguousarray(BanditInstance.one_armed(curve, T).means)
    three = np.ascontiguousarray(BanditInstance((ConstantCurve(0.0), curve, ConstantCurve(0.005)), T).means)
    u = rng.random(T)
    bounds = EpochLayout.from_delta(T, T ** (-1 / 3)).boundaries.astype(np.int64)
    B = T ** (1 / 3)
    arms = np.empty(T, dtype=np.int64)
    per_epoch = np.zeros(len(bounds) - 1)
    pulls = np.zeros(2, dtype=np.int64)
    n = 1024
    dev = rng.choice([-1.0, 1.0], n)
    return {
        "be1": lambda k: k.be1(one, u, bounds, B, arms),
        "be2": lambda k: k.be2(one, u, bounds, B, arms),
        "bek (k=3)": lambda k: k.bek(three, u, bounds, B, arms),
        "oracle": lambda k: k.oracle(one, arms),
        "account": lambda k: k.account(one, u, arms, bounds, per_epoch, pulls),
        f"clean_scan (n={n})": lambda k: k.clean_scan(dev, 6 * math.log(n), 2 * math.log(n)),
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--T", type=int, default=2**16)
    p.add_argument("--repeats", type=int, default=5)
    args = p.parse_args()
    if "numba" not in BACKENDS:
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(0)
    table = cases(args.T, rng)
    print(f"T = {args.T}, best of {args.repeats}")
    print(f"{'kernel':<20}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, call in table.items():
        call(BACKENDS["numba"])  # compile
        tn = best_time(lambda: call(BACKENDS["numba"]), args.repeats)
        tp = best_time(lambda: call(BACKENDS["numpy"]), args.repeats)
        print(f"{name:<20}{tn * 1e3:>12.3f}{tp * 1e3:>12.3f}{tp / tn:>10.1f}x")


if __name__ == "__main__":
    main()
