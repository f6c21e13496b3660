"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Reports the best wall time per kernel and backend, after one warm-up call
that also absorbs numba's compile (or cache load).
"""

import argparse
import math
import time

import numpy as np

from sandroll import _kernels
from sandroll.gait import rolling_profile, shipped_gait
from sandroll.shapespace import grid_axis
from sandroll.substrate import SubstrateParams, TerrainField, terrain_length


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def sweep_case(k, n=721):
    axis = grid_axis(n)
    return lambda: k.closed_form_sweep(axis, axis, math.radians(20.0), 0.056)


def roll_case(k, n=181):
    axis = grid_axis(n)
    a, z = np.meshgrid(axis, axis, indexing="ij")
    g = 2.0 * math.pi - a - z
    ok = (a > 0) & (z > 0) & (g > 1e-12) & (g <= math.pi)
    rows = np.ascontiguousarray(np.stack([a, z, g, a, z, g], axis=-1)[ok])
    return lambda: k.batch_roll(rows, 0.056, 0, math.radians(20.0))


def strides_case(k, trials=30):
    gait = shipped_gait("quad")
    prof = rolling_profile(gait)
    p = SubstrateParams()
    area = prof.land_length * 0.072
    pressure = 5.0 / area / p.bearing_stiffness
    length = terrain_length(prof, 1.0, 0.056)
    fields = [TerrainField.noisy(length, 0.005, s, 0.001) for s in range(trials)]

    def go():
        for f in fields:
            k.run_strides(f.depth.copy(), f.load_count.copy(), 0.001, 0.056, prof.land_length,
                          prof.advance, pressure, p.feedback_gain, p.effective_slip,
                          prof.frame.com[0], prof.frame.com[1], 0.0, 1.0, 200, 2)
    return go


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    fast = _kernels.get_backend("numba")
    slow = _kernels.get_backend("numpy")
    if fast is slow:
        print("numba is not importable; only the numpy backend is available")
    cases = {
        "closed-form sweep 721x721": sweep_case,
        "projection oracle 181x181": roll_case,
        "30 sand trials (quad)": strides_case,
    }
    print(f"{'kernel':32s} {'numpy (s)':>10s} {'numba (s)':>10s} {'speedup':>8s}")
    for name, case in cases.items():
        t_np = _best(case(slow), args.repeat)
        t_nb = _best(case(fast), args.repeat)
        print(f"{name:32s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
