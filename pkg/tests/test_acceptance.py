"""One test per acceptance criterion; each prints a PASS/FAIL line at its tolerance."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from sandroll.errors import ExcessiveSinkage
from sandroll.gait import geometric_step_length, shipped_gait, switching_configs
from sandroll.geometry import support_frame
from sandroll.shapespace import ShapeParams, classify_slope, grid_axis, parallelogon, sweep
from sandroll.stability import Roll, critical_pitch, gravity_project, roll_outcome
from sandroll.substrate import Outcome, SubstrateParams, run, shipped_scenario
from sandroll.trajectory import load_trajectory, segment_steps, summarize
from sandroll.tuning import batch_outcomes

PI = math.pi
SHAPES = ("hex", "tri", "quad")
PUBLISHED = {"hex": 13.6, "tri": 33.4, "quad": 39.5}


def test_criterion_1_critical_pitch_values(report, capsys):
    from sandroll.cli import main
    t0 = time.perf_counter()
    shown = {}
    for s in SHAPES:
        shipped_gait.cache_clear()
        assert main(["betamax", "--shape", s]) == 0
        shown[s] = float(capsys.readouterr().out.split("critical pitch ")[1].split()[0])
    elapsed = time.perf_counter() - t0
    # a cold process per shape, as a user would run it
    cold = []
    for s in SHAPES:
        t1 = time.perf_counter()
        proc = subprocess.run([sys.executable, "-m", "sandroll.cli", "betamax", "--shape", s],
                              capture_output=True, text=True, check=True)
        cold.append(time.perf_counter() - t1)
        assert f"{PUBLISHED[s]:.1f} deg" in proc.stdout
    exact = {s: critical_pitch(switching_configs(shipped_gait(s))[0].frame).beta_m for s in SHAPES}
    within = all(abs(exact[s] - PUBLISHED[s]) <= 0.5 and abs(shown[s] - PUBLISHED[s]) <= 0.5
                 for s in SHAPES)
    ordered = exact["hex"] < exact["tri"] < exact["quad"]
    report(1, within and ordered and elapsed < 1.0 and max(cold) < 1.0,
           f"betamax hex/tri/quad = {shown['hex']}/{shown['tri']}/{shown['quad']} deg "
           f"(target 13.6/33.4/39.5 +/- 0.5), strict order {ordered}; {elapsed:.3f} s in process, "
           f"slowest cold CLI run {max(cold):.2f} s (< 1 s)")


def test_criterion_2_closed_form_matches_projection(report):
    t0 = time.perf_counter()
    axis = grid_axis(181)
    frames = {}
    for i, a in enumerate(axis):
        for j, z in enumerate(axis):
            try:
                sp = ShapeParams(float(a), float(z))
            except ValueError:
                continue
            frames[(i, j)] = (sp, support_frame(parallelogon(sp), 0))
    checked = mismatched = banded = 0
    for inc in (0.0, 5.0, 10.0, 20.0, 30.0):
        for sp, frame in frames.values():
            oracle = roll_outcome(frame, inc)
            if abs(oracle.margin) <= 1e-9:
                banded += 1
                continue
            checked += 1
            if classify_slope(sp, inc).direction is not oracle.direction:
                mismatched += 1
    elapsed = time.perf_counter() - t0
    report(2, mismatched == 0 and elapsed < 5.0,
           f"{checked} valid cells x inclines agree exactly, {mismatched} mismatches, "
           f"{banded} inside the 1e-9 band, {elapsed:.2f} s (< 5 s)")


def test_criterion_3_slope_anchors(report):
    cross = ShapeParams(PI / 3, 5 * PI / 6)
    level = classify_slope(cross, 0.0).direction
    uphill = classify_slope(cross, 20.0).direction
    counts = {inc: sweep(181, inc).counts for inc in (0.0, 10.0, 20.0, 30.0)}
    fwd = [counts[i]["forward"] for i in sorted(counts)]
    back = [counts[i]["backward"] for i in sorted(counts)]
    mono = all(a >= b for a, b in zip(fwd, fwd[1:])) and all(a <= b for a, b in zip(back, back[1:]))
    report(3, level is Roll.FORWARD and uphill is Roll.NONE and mono,
           f"P(60,150): {level.value} at 0 deg, {uphill.value} at 20 deg; forward counts {fwd} "
           f"non-increasing, backward counts {back} non-decreasing")


def test_criterion_4_analytic_spot_checks(report):
    # the rounded point (1.1830, 0.6830) is the centroid of unit P(60, 150)
    exact_com = ((3 + math.sqrt(3)) / 4, (1 + math.sqrt(3)) / 4)
    xp = gravity_project(exact_com, 15.0)
    xp_rounded = gravity_project((1.1830, 0.6830), 15.0)
    beta = critical_pitch(support_frame(parallelogon(ShapeParams(PI / 3, 5 * PI / 6)), 0)).beta_m
    ok = abs(xp - 1.0) <= 1e-6 and abs(beta - 15.0) <= 0.01 and round(xp_rounded, 4) == 1.0
    report(4, ok,
           f"projection at 15 deg = {xp:.10f} (|err| {abs(xp - 1):.1e} <= 1e-6; the 4-decimal "
           f"inputs give {xp_rounded:.6f}); critical pitch = {beta:.6f} deg (15.00 +/- 0.01)")


def test_criterion_5_rigid_ground(report):
    rigid = shipped_scenario("rigid")
    parts, ok = [], True
    for s in SHAPES:
        g = shipped_gait(s)
        res = rigid.run_seed(g, 0, log=False)
        osc = sum(r.outcome is Outcome.OSCILLATE for r in res.records)
        expect = res.summary.switches * geometric_step_length(g)
        good = (res.summary.stop_reason == "course" and res.summary.distance >= 1.0
                and osc == 0 and res.summary.distance == expect)
        ok &= good
        parts.append(f"{s}: {res.summary.distance:.4f} m in {res.summary.switches} switches, "
                     f"{osc} oscillations, displacement == switches x step: "
                     f"{res.summary.distance == expect}")
    report(5, ok, "; ".join(parts))


def test_criterion_6_sand_failure_pattern(report):
    t0 = time.perf_counter()
    sand = shipped_scenario("sand")
    out = {s: batch_outcomes(sand, s, 30) for s in SHAPES}
    elapsed = time.perf_counter() - t0
    ok = (out["quad"]["failure_rate"] == 0.0 and elapsed < 30.0
          and all(out[s]["failure_rate"] > 0.5 and out[s]["median_failure_distance_m"] < 0.20
                  for s in ("hex", "tri")))
    report(6, ok,
           f"failure rates hex {out['hex']['failure_rate']:.3f}, tri {out['tri']['failure_rate']:.3f}"
           f" (> 0.5), quad {out['quad']['failure_rate']:.3f} (= 0); median failure distance hex "
           f"{100 * out['hex']['median_failure_distance_m']:.1f} cm, tri "
           f"{100 * out['tri']['median_failure_distance_m']:.1f} cm (< 20 cm); {elapsed:.2f} s (< 30 s)")


def test_criterion_7_adaptation_effect(report):
    base = {s: batch_outcomes(shipped_scenario("sand"), s, 30) for s in ("hex", "tri")}
    adapted_sc = shipped_scenario("sand_adapted")
    adapted = {s: batch_outcomes(adapted_sc, s, 30) for s in ("hex", "tri")}
    cut = {s: 1 - adapted[s]["mean_pitch_deg"] / base[s]["mean_pitch_deg"] for s in base}
    gain = adapted["tri"]["mean_step_m"] / base["tri"]["mean_step_m"]
    zero = all(adapted[s]["failure_rate"] == 0.0 for s in adapted)
    ok = cut["tri"] >= 0.30 and cut["hex"] >= 0.50 and gain >= 2.0 and zero
    report(7, ok,
           f"adaptation factor {adapted_sc.substrate.adaptation_factor:g}: mean pitch cut tri "
           f"{100 * cut['tri']:.1f}% (>= 30%), hex {100 * cut['hex']:.1f}% (>= 50%); tri step "
           f"length x{gain:.2f} (>= 2); failure rates hex/tri "
           f"{adapted['hex']['failure_rate']:.0f}/{adapted['tri']['failure_rate']:.0f} (= 0)")


def test_criterion_8_threshold_consistency(report):
    rng = np.random.default_rng(20240808)
    betas = {s: critical_pitch(switching_configs(shipped_gait(s))[0].frame).beta_m for s in SHAPES}
    steps = exceptions = trials = sunk = 0
    while steps < 10_000:
        s = SHAPES[rng.integers(3)]
        params = SubstrateParams(bearing_stiffness=float(rng.uniform(150e3, 600e3)),
                                 shear_slip=float(rng.uniform(0.0, 1.0)),
                                 feedback_gain=float(rng.uniform(0.0, 1.5)),
                                 adaptation_factor=float(rng.uniform(1.0, 4.0)))
        try:
            res = run(shipped_gait(s), params, 200, float(rng.uniform(0.2, 2.0)),
                      int(rng.integers(1 << 30)), terrain_noise=float(rng.uniform(0.0, 0.01)),
                      log=False)
        except ExcessiveSinkage:
            sunk += 1
            continue
        trials += 1
        for r in res.records:
            steps += 1
            if (r.outcome is Outcome.OSCILLATE) != (r.pitch_at_switch > betas[s]):
                exceptions += 1
    report(8, exceptions == 0,
           f"{steps} fuzzed sand steps over {trials} trials, {exceptions} exceptions "
           f"(oscillate exactly when pitch > critical pitch); {sunk} trials stopped by "
           f"excessive sinkage were discarded")


def test_criterion_9_round_trip(report, tmp_path):
    worst_len = worst_pitch = worst_speed = 0.0
    n = 0
    for name in ("sand", "sand_adapted", "rigid"):
        sc = shipped_scenario(name)
        for s in SHAPES:
            for seed in range(3):
                res = sc.run_seed(shipped_gait(s), seed)
                path = tmp_path / f"{name}_{s}_{seed}.csv"
                path.write_text(res.trajectory.to_csv())
                steps = segment_steps(load_trajectory(path), 3.0)
                assert len(steps) == len(res.records)
                for a, r in zip(steps, res.records):
                    worst_len = max(worst_len, abs(a.step_length - r.step_length))
                    worst_pitch = max(worst_pitch, abs(a.pitch_deg - r.pitch_at_switch))
                stats = summarize(steps, sc.course_length_m, 3.0)
                worst_speed = max(worst_speed,
                                  abs(stats.mean_speed * 3.0 * stats.stop_index - stats.distance))
                n += 1
    ok = worst_len <= 1e-6 and worst_pitch <= 1e-6 and worst_speed <= 1e-9
    report(9, ok,
           f"{n} simulated logs re-analyzed: max step length error {worst_len:.1e} m, max pitch "
           f"error {worst_pitch:.1e} deg (<= 1e-6); max |speed x time - displacement| "
           f"{worst_speed:.1e} m (<= 1e-9)")


def test_criterion_10_excluded(report):
    pytest.skip("criterion 10 lists results excluded by definition (absolute sand speeds, "
                "raw per-step scatter); criteria 6-8 stand in for them")
