"""Build-time calibration of the shipped gaits and sand parameters.

Usage::

    python3 -m sandroll.calibrate gaits      # rewrite data/gaits/*.json
    python3 -m sandroll.calibrate stiffness  # report the fitted sand stiffness
    python3 -m sandroll.calibrate bracket    # report the fitted adaptation factor

Each shipped gait keeps one asymmetry parameter free at its switching
moment: the interior angle at the rear contact. That angle is solved so the
closed-form critical pitch of the switching shape hits the target value.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .gait import STRIDE_PERIOD, gait_from_dict, project_closure
from .geometry import SEGMENT_LENGTH, build_chain, support_frame
from .stability import critical_pitch

TARGET_BETA = {"hexagon": 13.6, "triangle": 33.4, "quadrilateral": 39.5}
SWITCH_PHASE = 0.5
PI = math.pi


def hexagon_switching(alpha: float) -> list:
    """Parallelogon with the front-contact angle held at 150 degrees."""
    zeta = 5.0 * PI / 6.0
    return [alpha, zeta, 2.0 * PI - alpha - zeta] * 2


def quadrilateral_switching(alpha: float) -> list:
    """Parallelogram built from a 1 x 2 segment rectangle, sheared by alpha."""
    return [alpha, PI - alpha, PI] * 2


def triangle_switching(alpha: float) -> list:
    """Kite from the 2-segment-sided triangle with its rear corner opened to alpha.

    Joints 2 and 4 stay straight; joints 1, 3 and 5 close the chain.
    """
    start = [alpha, PI / 3.0, PI, PI / 3.0, PI, PI / 3.0]
    return list(project_closure(start, fixed=(0, 2, 4)))


FAMILIES = {
    "hexagon": (hexagon_switching, [2.0 * PI / 3.0] * 6, (math.radians(40.0), math.radians(90.0))),
    "quadrilateral": (quadrilateral_switching, [PI / 2.0, PI / 2.0, PI] * 2,
                      (math.radians(10.0), math.radians(60.0))),
    "triangle": (triangle_switching, [PI, PI / 3.0, PI, PI / 3.0, PI, PI / 3.0],
                 (math.radians(30.0), math.radians(60.0))),
}


def switching_beta(angles) -> float:
    """Critical pitch in degrees of a shape resting on segment 0."""
    frame = support_frame(build_chain(len(angles), SEGMENT_LENGTH, angles), 0)
    beta = critical_pitch(frame).beta_m
    return -1.0 if beta is None else beta


def calibrate_family(name: str) -> tuple:
    """Solve the rear-contact angle; returns (alpha_rad, switching angles)."""
    family, _, (lo, hi) = FAMILIES[name]
    target = TARGET_BETA[name]
    alpha = brentq(lambda a: switching_beta(family(a)) - target, lo, hi, xtol=1e-15, rtol=1e-15)
    return alpha, family(alpha)


def gait_document(name: str) -> dict:
    alpha, switching = calibrate_family(name)
    rest = FAMILIES[name][1]
    return {
        "name": name,
        "stride_period_s": STRIDE_PERIOD,
        "segment_length_m": SEGMENT_LENGTH,
        "keyframes": [
            {"phase": 0.0, "interior_angles_rad": [float(a) for a in rest]},
            {"phase": SWITCH_PHASE, "interior_angles_rad": [float(a) for a in switching]},
        ],
        "switching_phases": [SWITCH_PHASE],
        "calibration": {
            "target_critical_pitch_deg": TARGET_BETA[name],
            "rear_contact_angle_deg": math.degrees(alpha),
            "note": "rear-contact angle of the switching keyframe solved so the "
                    "closed-form critical pitch matches the target",
        },
    }


def write_gaits(out_dir: Path) -> list:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in FAMILIES:
        doc = gait_document(name)
        gait_from_dict(doc)  # validates closure of every keyframe
        path = out_dir / f"{name}.json"
        path.write_text(json.dumps(doc, indent=2) + "\n")
        written.append(path)
    return written


def _data_dir() -> Path:
    return Path(__file__).resolve().parent / "data"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python3 -m sandroll.calibrate")
    sub = parser.add_subparsers(dest="task", required=True)
    g = sub.add_parser("gaits", help="solve and write the shipped gait files")
    g.add_argument("--out-dir", type=Path, default=_data_dir() / "gaits")
    s = sub.add_parser("stiffness", help="fit sand bearing stiffness to the failure pattern")
    s.add_argument("--seeds", type=int, default=30)
    b = sub.add_parser("bracket", help="fit the adaptation factor")
    b.add_argument("--seeds", type=int, default=30)
    args = parser.parse_args(argv)

    if args.task == "gaits":
        for path in write_gaits(args.out_dir):
            doc = json.loads(path.read_text())
            beta = switching_beta(doc["keyframes"][1]["interior_angles_rad"])
            print(f"{path.name}: critical pitch {beta:.4f} deg")
        return 0

    from . import tuning
    if args.task == "stiffness":
        fit = tuning.fit_stiffness(seeds=args.seeds)
        print(json.dumps(fit, indent=2))
        return 0
    fit = tuning.fit_bracket(seeds=args.seeds)
    print(json.dumps(fit, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
