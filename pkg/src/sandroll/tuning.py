"""Fits of the sand stiffness and the adaptation factor against trial outcomes.

Both fits are grid searches over seeded batches of simulated trials; they
are slow-ish build-time tools, not runtime code.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .errors import ExcessiveSinkage
from .gait import shipped_gait
from .substrate import Scenario, shipped_scenario

# observed sand failure rates, and the Hexagon failure distance window (m)
TARGET_FAILURE = {"hex": 0.833, "tri": 0.666, "quad": 0.0}
HEX_MEDIAN_WINDOW = (0.095 - 0.092, 0.095 + 0.092)
STIFFNESS_GRID = np.arange(150000.0, 400001.0, 5000.0)
BRACKET_GRID = np.arange(1.0, 6.01, 0.25)
BRACKET_MARGIN = 1.02  # keep the chosen factor clear of the thresholds


def batch_outcomes(scenario: Scenario, shape: str, seeds: int) -> dict:
    """Failure rate, median failure distance, mean pitch and mean step over seeds.

    Returns None if any trial sinks a full segment length; such a stiffness
    is outside the model's range.
    """
    gait = shipped_gait(shape)
    dist, pitch, length = [], [], []
    for seed in range(seeds):
        try:
            res = scenario.run_seed(gait, seed, log=False)
        except ExcessiveSinkage:
            return None
        dist.append(res.summary.distance)
        pitch.extend(r.pitch_at_switch for r in res.records)
        length.extend(r.step_length for r in res.records)
    dist = np.array(dist)
    failed = dist < 0.20
    return {
        "failure_rate": float(failed.mean()),
        "median_failure_distance_m": float(np.median(dist[failed])) if failed.any() else None,
        "mean_pitch_deg": float(np.mean(pitch)),
        "mean_step_m": float(np.mean(length)),
    }


def fit_stiffness(seeds: int = 30, grid=STIFFNESS_GRID, base: Scenario | None = None) -> dict:
    """Pick the bearing stiffness that best reproduces the sand failure pattern.

    Candidates must put the Hexagon's median failure distance inside the
    observed window. Among those, the winner minimizes the squared error of
    the three failure rates against the observed ones. Ties go to the
    smaller stiffness.
    """
    base = base or shipped_scenario("sand")
    best = None
    table = []
    for k in grid:
        sc = replace(base, substrate=replace(base.substrate, bearing_stiffness=float(k)))
        out = {s: batch_outcomes(sc, s, seeds) for s in TARGET_FAILURE}
        if any(v is None for v in out.values()):
            table.append({"stiffness": float(k), "error": None, "hex_median_in_window": False,
                          "note": "sinkage reached the segment length"})
            continue
        med = out["hex"]["median_failure_distance_m"]
        in_window = med is not None and HEX_MEDIAN_WINDOW[0] <= med <= HEX_MEDIAN_WINDOW[1]
        err = sum((out[s]["failure_rate"] - TARGET_FAILURE[s]) ** 2 for s in TARGET_FAILURE)
        table.append({"stiffness": float(k), "error": err, "hex_median_in_window": in_window,
                      **{f"{s}_failure": out[s]["failure_rate"] for s in out}})
        if in_window and (best is None or err < best["error"] - 1e-12):
            best = table[-1]
    return {"best": best, "grid": table}


def fit_bracket(seeds: int = 30, grid=BRACKET_GRID, base: Scenario | None = None) -> dict:
    """Smallest adaptation factor giving the full adaptation effect.

    Requires zero Hexagon and Triangle failures, mean pitch cut by at least
    half for the Hexagon and by 30% for the Triangle, and Triangle mean step
    length at least doubled, all relative to the unadapted base.
    """
    base = base or shipped_scenario("sand")
    ref = {s: batch_outcomes(base, s, seeds) for s in ("hex", "tri")}
    table = []
    chosen = None
    for af in grid:
        sc = replace(base, substrate=replace(base.substrate, adaptation_factor=float(af)))
        out = {s: batch_outcomes(sc, s, seeds) for s in ("hex", "tri")}
        if any(v is None for v in out.values()):
            continue
        cut = {s: 1.0 - out[s]["mean_pitch_deg"] / ref[s]["mean_pitch_deg"] for s in out}
        gain = out["tri"]["mean_step_m"] / ref["tri"]["mean_step_m"]
        row = {"adaptation_factor": float(af),
               **{f"{s}_failure": out[s]["failure_rate"] for s in out},
               **{f"{s}_pitch_reduction": cut[s] for s in out},
               "tri_step_gain": gain}
        table.append(row)
        ok = (all(out[s]["failure_rate"] == 0.0 for s in out)
              and cut["hex"] >= BRACKET_MARGIN * 0.5 and cut["tri"] >= BRACKET_MARGIN * 0.3
              and gain >= BRACKET_MARGIN * 2.0)
        if ok:
            chosen = row
            break
    return {"best": chosen, "grid": table}
