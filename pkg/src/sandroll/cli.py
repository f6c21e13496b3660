"""Command-line front end: ``sandroll <subcommand> ...``.

Exit codes: 0 on success, 1 on a domain or I/O error, 2 on a usage error.
Console output uses degrees, cm and cm/s; files keep SI units with
unit-suffixed names.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import gait as gait_mod
from . import shapespace, substrate, trajectory
from .errors import SandrollError
from .stability import critical_pitch
from .svg import Plot

GREEN_CROSS = (math.pi / 3.0, 5.0 * math.pi / 6.0)
ROLL_COLORS = {"forward": "red", "backward": "blue", "none": "black"}


class UsageError(Exception):
    pass


def _write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _thread_cap() -> int:
    raw = os.environ.get("SANDROLL_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"SANDROLL_THREADS must be an integer, got {raw!r}")
    if n < 1:
        raise UsageError(f"SANDROLL_THREADS must be >= 1, got {n}")
    return n


def _resolve_gait(args) -> gait_mod.Gait:
    if getattr(args, "gait", None):
        return gait_mod.load_gait(args.gait)
    return gait_mod.shipped_gait(args.shape)


# betamax

def cmd_betamax(args) -> int:
    g = _resolve_gait(args)
    rows = []
    for cfg in gait_mod.switching_configs(g):
        beta = critical_pitch(cfg.frame).beta_m
        rows.append({"phase": cfg.phase, "support_index": cfg.support_index,
                     "critical_pitch_deg": None if beta is None else round(beta, 1),
                     "rolls_forward": beta is not None})
    if args.json:
        print(_dump_json({"gait": g.name, "switching": rows}), end="")
        return 0
    for r in rows:
        if r["critical_pitch_deg"] is None:
            print(f"{g.name} phase {r['phase']:.3f}: does not roll forward on level ground")
        else:
            print(f"{g.name} phase {r['phase']:.3f}: critical pitch {r['critical_pitch_deg']:.1f} deg")
    return 0


# shapespace

def shapespace_svg(cmap: shapespace.ClassificationMap) -> str:
    deg = np.degrees(cmap.alpha)
    plot = Plot((0.0, 180.0), (0.0, 180.0), "alpha (deg)", "zeta (deg)",
                f"rolling class at {cmap.incline:g} deg incline")
    a, z = np.meshgrid(deg, np.degrees(cmap.zeta), indexing="ij")
    radius = max(0.6, min(4.0, 200.0 / cmap.grid_n))
    for code, name in ((1, "forward"), (-1, "backward"), (0, "none")):
        sel = cmap.valid & (cmap.outcome == code)
        plot.scatter(a[sel], z[sel], ROLL_COLORS[name], radius, label=name)
    plot.scatter([math.degrees(GREEN_CROSS[0])], [math.degrees(GREEN_CROSS[1])], "green", 7.0,
                 marker="cross", label="P(60, 150)")
    return plot.render()


def cmd_shapespace(args) -> int:
    if not 0.0 <= args.theta < 90.0:
        raise UsageError(f"--theta must lie in [0, 90), got {args.theta}")
    if args.grid < 2:
        raise UsageError(f"--grid must be >= 2, got {args.grid}")
    cmap = shapespace.sweep(args.grid, args.theta)
    _write_atomic(args.out, cmap.to_csv())
    if args.svg:
        _write_atomic(args.svg, shapespace_svg(cmap))
    c = cmap.counts
    cross = cmap.lookup(*GREEN_CROSS)
    print(f"theta {args.theta:g} deg, grid {args.grid}: forward {c['forward']}, "
          f"backward {c['backward']}, none {c['none']}, invalid {c['invalid']}; "
          f"P(60, 150) -> {cross.value if cross else 'invalid'}")
    return 0


# simulate

def _scenario(args) -> substrate.Scenario:
    if args.config:
        sc = substrate.load_scenario(args.config)
    else:
        sc = substrate.shipped_scenario(args.terrain)
    if args.terrain == "rigid" and not sc.substrate.rigid:
        sc = replace(sc, substrate=replace(sc.substrate, rigid=True))
    if args.seeds is not None:
        if args.seeds < 1:
            raise UsageError(f"--seeds must be >= 1, got {args.seeds}")
        sc = replace(sc, seeds=args.seeds)
    return sc


def cmd_simulate(args) -> int:
    sc = _scenario(args)
    base = Path(args.config).parent if args.config else None
    override = args.gait or args.shape
    g = sc.resolve_gait(override, base)
    out = Path(args.out_dir)
    seeds = list(range(sc.seeds))

    def one(seed):
        return seed, sc.run_seed(g, seed, log=True)

    workers = min(_thread_cap(), len(seeds))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]

    per_seed = []
    for seed, res in results:
        stem = out / f"seed_{seed:03d}"
        _write_atomic(Path(f"{stem}_trajectory.csv"), res.trajectory.to_csv())
        _write_atomic(Path(f"{stem}_steps.csv"), substrate.records_to_csv(res.records))
        summ = {"seed": seed, **res.summary.to_json_dict()}
        _write_atomic(Path(f"{stem}_summary.json"), _dump_json(summ))
        per_seed.append(summ)

    failures = [s["failure"] for s in per_seed]
    speeds = np.array([s["mean_speed_cm_s"] for s in per_seed])
    dists = np.array([s["distance_cm"] for s in per_seed])
    failed = dists[np.array(failures)]
    aggregate = {
        "gait": g.name,
        "terrain": "rigid" if sc.substrate.rigid else "sand",
        "seeds": len(seeds),
        "failure_rate": float(np.mean(failures)),
        "mean_speed_cm_s": float(speeds.mean()),
        "std_speed_cm_s": float(speeds.std()),
        "median_failure_distance_cm": float(np.median(failed)) if failed.size else None,
        "scenario": sc.to_dict(),
        "trials": per_seed,
    }
    _write_atomic(out / "aggregate.json", _dump_json(aggregate))
    med = aggregate["median_failure_distance_cm"]
    print(f"{g.name} on {aggregate['terrain']}, {len(seeds)} seeds: failure rate "
          f"{aggregate['failure_rate']:.3f}, speed {aggregate['mean_speed_cm_s']:.2f} "
          f"+/- {aggregate['std_speed_cm_s']:.2f} cm/s"
          + (f", median failure distance {med:.1f} cm" if med is not None else ""))
    return 0


# analyze / plot

def _switch_times(traj: trajectory.Trajectory, period: float, phase):
    if phase is None:
        return None
    if not 0.0 <= phase < 1.0:
        raise UsageError(f"--switch-phase must lie in [0, 1), got {phase}")
    n = int(math.floor(traj.duration / period + 1e-9))
    step = 1.0 / traj.sample_rate
    # snap to the sample grid so the event lands on a logged instant
    return [round((traj.t[0] + (k + phase) * period) / step) * step for k in range(n)]


def _beta_for_plot(args):
    if args.beta_m is not None:
        return args.beta_m
    if args.gait or args.shape:
        cfgs = gait_mod.switching_configs(_resolve_gait(args))
        return critical_pitch(cfgs[0].frame).beta_m
    return None


def step_plot(steps, beta_m=None, title: str = "") -> str:
    pitch = np.array([s.pitch_deg for s in steps], dtype=float)
    length = np.array([s.step_length for s in steps], dtype=float) * 100.0
    xmax = max(60.0, float(np.nanmax(pitch)) * 1.1 if pitch.size else 0.0)
    ymin = min(-1.0, float(length.min()) - 0.5 if length.size else 0.0)
    ymax = max(8.0, float(length.max()) * 1.1 if length.size else 0.0)
    xmin = min(0.0, float(pitch.min()) - 1.0) if pitch.size else 0.0
    plot = Plot((xmin, xmax), (ymin, ymax), "pitch at switch (deg)", "step length (cm)", title)
    plot.rect(xmin, ymin, xmax, trajectory.SUCCESS_STEP * 100.0, "gray", 0.2,
              label="failing (< 2 cm)")
    if beta_m is not None:
        plot.line([beta_m, beta_m], [ymin, ymax], "green", 2.0, dash="6,4",
                  label=f"critical pitch {beta_m:.1f} deg")
    ok = np.array([s.success for s in steps], dtype=bool)
    plot.scatter(pitch[ok], length[ok], "blue", 3.5, label="step")
    plot.scatter(pitch[~ok], length[~ok], "red", 3.5, label="failing step")
    return plot.render()


def _analyze(args):
    traj = trajectory.load_trajectory(args.traj)
    if args.stride_period <= 0:
        raise UsageError("--stride-period must be positive")
    times = _switch_times(traj, args.stride_period, args.switch_phase)
    steps = trajectory.segment_steps(traj, args.stride_period, times)
    return traj, steps


def cmd_analyze(args) -> int:
    _, steps = _analyze(args)
    stats = trajectory.summarize(steps, args.course, args.stride_period)
    out = Path(args.out_dir)
    _write_atomic(out / "steps.csv", trajectory.steps_to_csv(steps))
    _write_atomic(out / "summary.json", _dump_json(stats.to_json_dict()))
    if args.svg:
        _write_atomic(Path(args.svg), step_plot(steps, _beta_for_plot(args)))
    d = stats.to_json_dict()
    print(f"{len(steps)} strides, {stats.stop_index} before stop ({stats.stop_reason}): "
          f"speed {d['mean_speed_cm_s']:.2f} +/- {d['std_cm_s']:.2f} cm/s, "
          f"distance {d['distance_cm']:.1f} cm, failure {str(stats.failure).lower()}")
    return 0


def cmd_plot(args) -> int:
    _, steps = _analyze(args)
    _write_atomic(Path(args.out), step_plot(steps, _beta_for_plot(args)))
    print(f"wrote {args.out} ({len(steps)} strides)")
    return 0


def _gait_choice(p: argparse.ArgumentParser, required: bool) -> None:
    grp = p.add_mutually_exclusive_group(required=required)
    grp.add_argument("--gait", type=Path, help="gait JSON file")
    grp.add_argument("--shape", choices=sorted(gait_mod.SHIPPED), help="shipped calibrated gait")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sandroll",
                                     description="Rolling-stability tools for a six-segment closed-chain robot.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("betamax", help="critical pitch of each switching configuration")
    _gait_choice(p, True)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_betamax)

    p = sub.add_parser("shapespace", help="classify the parallelogon shape family on an incline")
    p.add_argument("--theta", type=float, required=True, help="uphill incline in degrees, [0, 90)")
    p.add_argument("--grid", type=int, default=181, help="points per axis (default 181)")
    p.add_argument("--out", type=Path, required=True, help="classification CSV")
    p.add_argument("--svg", type=Path, help="optional map figure")
    p.set_defaults(func=cmd_shapespace)

    p = sub.add_parser("simulate", help="run seeded trials on rigid ground or sand")
    _gait_choice(p, False)
    p.add_argument("--terrain", choices=("rigid", "sand"), default="sand")
    p.add_argument("--config", type=Path, help="scenario JSON (overrides the terrain preset)")
    p.add_argument("--seeds", type=int, help="number of seeds (default from the scenario)")
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_simulate)

    for name, help_text in (("analyze", "measure steps and speed from a trajectory log"),
                            ("plot", "step length vs pitch figure from a trajectory log")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--traj", type=Path, required=True, help="trajectory CSV")
        p.add_argument("--stride-period", type=float, default=gait_mod.STRIDE_PERIOD)
        p.add_argument("--switch-phase", type=float,
                       help="known switching phase; default detects events from the log")
        grp = p.add_mutually_exclusive_group()
        grp.add_argument("--gait", type=Path, help="gait whose critical pitch is drawn")
        grp.add_argument("--shape", choices=sorted(gait_mod.SHIPPED))
        grp.add_argument("--beta-m", type=float, help="critical pitch line in degrees")
        if name == "analyze":
            p.add_argument("--course", type=float, default=1.0, help="course length in meters")
            p.add_argument("--out-dir", type=Path, required=True)
            p.add_argument("--svg", type=Path, help="optional step-length figure")
            p.set_defaults(func=cmd_analyze)
        else:
            p.add_argument("--out", type=Path, required=True, help="SVG file")
            p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sandroll {args.command}: {exc}", file=sys.stderr)
        return 2
    except (SandrollError, OSError, ValueError) as exc:
        print(f"sandroll {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
