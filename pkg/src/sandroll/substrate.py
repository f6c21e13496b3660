"""Quasi-static stride-by-stride rolling on a 1-D deformable terrain.

Each stride the robot attempts one support transfer. Before that attempt the
side it last landed on is pressed into the terrain. The rear end of the
support sinks deepest, which tilts the support up toward the front by
``asin(depth / L)``. That tilt enters the stability model exactly like a ramp
angle. If the switching configuration still tips forward, the body rolls
onto its next side and advances; otherwise it rocks back in place and digs
both contact cells deeper.

Terrain cells remember how often they were loaded, and every reload sinks
further (the feedback term). Slip during stance shortens each advance, so
successive footprints overlap and the rear contact lands on cells that were
already loaded.
"""

from __future__ import annotations

import enum
import functools
import json
import math
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ExcessiveSinkage, NonPositiveArea, SchemaError
from .gait import Gait, RollingProfile, blend_angles, config_at, load_gait, rolling_profile, shipped_gait
from .geometry import SEGMENT_WIDTH, build_chain, support_frame
from .stability import Roll, roll_outcome
from .trajectory import FAILURE_DISTANCE, SAMPLE_RATE, Trajectory, make_trajectory

LOAD_N = 5.0  # N, assumed robot weight
CELL_SIZE = 0.001  # m
STUCK_STRIDES = 2
MAX_STRIDES = 200


@dataclass(frozen=True)
class SubstrateParams:
    """Terrain response knobs.

    Attributes:
        bearing_stiffness: N/m^3; sinkage is pressure over stiffness.
        shear_slip: Fraction of each geometric advance lost to stance slip, in [0, 1].
        feedback_gain: Extra sinkage per earlier load on the same cell, >= 0.
        adaptation_factor: Bearing-area multiplier from the bracket adaptation, >= 1.
            It divides both the contact pressure and the slip.
        rigid: Rigid ground; no sinkage, no slip.
    """

    bearing_stiffness: float = 235000.0
    shear_slip: float = 0.6
    feedback_gain: float = 0.5
    adaptation_factor: float = 1.0
    rigid: bool = False

    def __post_init__(self):
        if not self.rigid and not self.bearing_stiffness > 0:
            raise ValueError(f"bearing_stiffness must be positive, got {self.bearing_stiffness}")
        if not 0.0 <= self.shear_slip <= 1.0:
            raise ValueError(f"shear_slip must lie in [0, 1], got {self.shear_slip}")
        if not self.feedback_gain >= 0.0:
            raise ValueError(f"feedback_gain must be >= 0, got {self.feedback_gain}")
        if not self.adaptation_factor >= 1.0:
            raise ValueError(f"adaptation_factor must be >= 1, got {self.adaptation_factor}")

    @property
    def effective_slip(self) -> float:
        return 0.0 if self.rigid else self.shear_slip / self.adaptation_factor


RIGID = SubstrateParams(rigid=True, shear_slip=0.0, feedback_gain=0.0)


@dataclass
class TerrainCell:
    """Sinkage and load history of one terrain cell (mutable)."""

    depth: float = 0.0
    load_count: int = 0


@dataclass
class TerrainField:
    """Per-cell sinkage depth and load count along the travel axis.

    Cell ``i`` covers [i * cell_size, (i + 1) * cell_size).
    """

    cell_size: float
    depth: np.ndarray
    load_count: np.ndarray

    @classmethod
    def flat(cls, length: float, cell_size: float = CELL_SIZE) -> "TerrainField":
        n = int(math.ceil(length / cell_size))
        return cls(cell_size, np.zeros(n), np.zeros(n, dtype=np.int64))

    @classmethod
    def noisy(cls, length: float, amplitude: float, seed: int,
              cell_size: float = CELL_SIZE) -> "TerrainField":
        """Initial depths drawn uniformly from [0, amplitude) with a seeded generator."""
        field_ = cls.flat(length, cell_size)
        if amplitude > 0:
            field_.depth[:] = np.random.default_rng(seed).uniform(0.0, amplitude, field_.depth.size)
        return field_

    def index(self, x: float) -> int:
        return int(math.floor(x / self.cell_size + 1e-9))

    def copy(self) -> "TerrainField":
        return TerrainField(self.cell_size, self.depth.copy(), self.load_count.copy())

    def load(self, i: int, load: float, area: float, params: SubstrateParams) -> float:
        cell = TerrainCell(float(self.depth[i]), int(self.load_count[i]))
        sink = touchdown_sinkage(load, area, params, cell)
        self.depth[i] = cell.depth
        self.load_count[i] = cell.load_count
        return sink


def touchdown_sinkage(load: float, contact_area: float, params: SubstrateParams,
                      cell: TerrainCell) -> float:
    """Extra sinkage from one load event on ``cell``.

    The increment is pressure over stiffness, amplified by earlier loads:
    ``load / (area * adaptation) / stiffness * (1 + gain * load_count)``.
    The cell's depth grows by that amount and its count goes up by one. On
    rigid ground the increment is 0 but the load is still counted.

    Raises:
        NonPositiveArea: ``contact_area`` <= 0.
    """
    if not contact_area > 0:
        raise NonPositiveArea(f"contact area must be positive, got {contact_area}")
    if load < 0:
        raise ValueError(f"load must be >= 0, got {load}")
    if params.rigid:
        sink = 0.0
    else:
        base = load / (contact_area * params.adaptation_factor) / params.bearing_stiffness
        sink = base * (1.0 + params.feedback_gain * cell.load_count)
    cell.depth += sink
    cell.load_count += 1
    return sink


def induced_pitch(depth: float, segment_length: float) -> float:
    """Support tilt in degrees when its rear end sits ``depth`` below its front.

    Raises:
        ExcessiveSinkage: depth >= segment_length.
    """
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    if depth >= segment_length:
        raise ExcessiveSinkage(
            f"sinkage {depth:.4f} m reaches the segment length {segment_length:.4f} m")
    return math.degrees(math.asin(depth / segment_length))


class Outcome(enum.Enum):
    ADVANCE = "advance"
    OSCILLATE = "oscillate"


@dataclass(frozen=True)
class StepRecord:
    """One stride.

    Attributes:
        step_index: 0-based stride number.
        step_length: Rear-contact advance in meters (0 when oscillating).
        pitch_at_switch: Support tilt in degrees passed to the stability test.
        outcome: ADVANCE or OSCILLATE.
        com_x: Centre-of-mass x in meters at the end of the stride.
    """

    step_index: int
    step_length: float
    pitch_at_switch: float
    outcome: Outcome
    com_x: float

    @property
    def pitch_deg(self) -> float:
        return self.pitch_at_switch


@dataclass(frozen=True)
class SimState:
    """Simulator state between strides.

    The rear contact sits at ``rear_origin + advances * step``; keeping the
    count rather than a running sum makes displacement an exact multiple of
    the per-switch advance.

    Attributes:
        com: Centre of mass (x, z) in meters at the start of the stride.
        support_index: Physical index of the supporting segment.
        phase: Gait phase; strides always start at 0.
        terrain: Terrain under the robot.
        stuck_cycles: Consecutive strides without an advance.
        step_index: Strides taken so far.
        rear_origin: Rear-contact x at the start of the trial.
        advances: Successful switches so far.
    """

    com: tuple
    support_index: int
    phase: float
    terrain: TerrainField
    stuck_cycles: int = 0
    step_index: int = 0
    rear_origin: float = 0.0
    advances: int = 0


@dataclass(frozen=True)
class TrialSummary:
    """Trial result.

    Speeds use only the strides before the stop; the two stuck strides that
    end a failed trial are excluded.
    """

    mean_speed: float
    std_speed: float
    distance: float
    failure: bool
    steps: int
    switches: int
    stop_reason: str

    def to_json_dict(self) -> dict:
        return {
            "mean_speed_cm_s": self.mean_speed * 100.0,
            "std_cm_s": self.std_speed * 100.0,
            "failure": self.failure,
            "distance_cm": self.distance * 100.0,
            "steps": self.steps,
            "switches": self.switches,
            "stop_reason": self.stop_reason,
        }


@dataclass(frozen=True, eq=False)
class SimResult:
    trajectory: Optional[Trajectory]
    records: tuple
    summary: TrialSummary
    terrain: TerrainField
    switch_times: np.ndarray
    profile: RollingProfile


@functools.lru_cache(maxsize=64)
def rest_com(gait: Gait) -> tuple:
    """Centre of mass of the phase-0 shape resting on segment 0, in its support frame."""
    return support_frame(build_chain(gait.joint_count, gait.segment_length, config_at(gait, 0.0)), 0).com


def initial_state(gait: Gait, terrain: TerrainField, rear_x: float = 0.0) -> SimState:
    cx, cz = rest_com(gait)
    return SimState((rear_x + cx, cz), 0, 0.0, terrain, rear_origin=rear_x)


def _stride_step(profile: RollingProfile, params: SubstrateParams) -> float:
    return profile.advance * (1.0 - params.effective_slip)


def step(state: SimState, gait: Gait, params: SubstrateParams, *, load: float = LOAD_N,
         width: float = SEGMENT_WIDTH) -> tuple:
    """Advance one stride.

    Returns:
        (new_state, record). The input state and its terrain are not modified.

    Raises:
        ExcessiveSinkage: The rear contact sank a full segment length.
    """
    prof = rolling_profile(gait)
    L = gait.segment_length
    area = prof.land_length * width
    delta = _stride_step(prof, params)
    terrain = state.terrain.copy()
    rear = state.rear_origin + state.advances * delta
    i0 = terrain.index(rear)
    for i in range(i0, terrain.index(rear + prof.land_length)):
        terrain.load(i, load, area, params)
    pitch = induced_pitch(float(terrain.depth[i0]), L)
    cx, cz = rest_com(gait)
    if roll_outcome(prof.frame, pitch).direction is Roll.FORWARD:
        advances = state.advances + 1
        rear = state.rear_origin + advances * delta
        new = replace(state, com=(rear + cx, cz),
                      support_index=(state.support_index + prof.pivot) % gait.joint_count,
                      terrain=terrain, stuck_cycles=0, step_index=state.step_index + 1,
                      advances=advances)
        rec = StepRecord(state.step_index, delta, pitch, Outcome.ADVANCE, rear + cx)
    else:
        terrain.load(i0, load, area, params)
        terrain.load(terrain.index(rear + L), load, area, params)
        new = replace(state, terrain=terrain, stuck_cycles=state.stuck_cycles + 1,
                      step_index=state.step_index + 1)
        rec = StepRecord(state.step_index, 0.0, pitch, Outcome.OSCILLATE, rear + cx)
    return new, rec


def terrain_length(profile: RollingProfile, course_length: float, segment_length: float) -> float:
    return course_length + profile.advance + profile.land_length + 2.0 * segment_length


def summarize_run(records, rear, stop_reason: str, stride_period: float) -> TrialSummary:
    n = len(records)
    kept = n - STUCK_STRIDES if stop_reason == "stuck" else n
    lengths = np.array([r.step_length for r in records[:kept]], dtype=float)
    if lengths.size:
        speeds = lengths / stride_period
        mean, std = float(speeds.mean()), float(speeds.std())
    else:
        mean, std = 0.0, 0.0
    distance = float(rear[n] - rear[0])
    switches = sum(1 for r in records if r.outcome is Outcome.ADVANCE)
    return TrialSummary(mean, std, distance, distance < FAILURE_DISTANCE, n, switches, stop_reason)


_STOP_NAMES = {_kernels.STOP_MAX_STRIDES: "max_strides", _kernels.STOP_COURSE: "course",
               _kernels.STOP_STUCK: "stuck"}


def run(gait: Gait, params: SubstrateParams, max_strides: int = MAX_STRIDES,
        course_length: float = 1.0, seed: int = 0, *, terrain_noise: float = 0.0,
        load: float = LOAD_N, width: float = SEGMENT_WIDTH, cell_size: float = CELL_SIZE,
        sample_rate: float = SAMPLE_RATE, log: bool = True,
        backend: Optional[str] = None) -> SimResult:
    """Simulate one trial.

    Stops when the course is complete, after two consecutive stuck strides,
    or at ``max_strides``.

    Args:
        gait: Gait with exactly one switching phase.
        params: Substrate parameters.
        max_strides: Stride budget, at least 1.
        course_length: Meters to traverse.
        seed: Seeds the initial terrain noise.
        terrain_noise: Amplitude in meters of uniform initial sinkage noise
            (ignored on rigid ground).
        load: Robot weight in N.
        width: Segment width in meters.
        cell_size: Terrain resolution in meters.
        sample_rate: Log rate in Hz.
        log: Build the joint trajectory (skipping it is much faster).
        backend: Kernel backend, "numba" or "numpy"; None follows the environment.

    Raises:
        ExcessiveSinkage: Sinkage reached the segment length.
    """
    if max_strides < 1:
        raise ValueError(f"max_strides must be >= 1, got {max_strides}")
    prof = rolling_profile(gait)
    L = gait.segment_length
    area = prof.land_length * width
    if not area > 0:
        raise NonPositiveArea(f"contact area must be positive, got {area}")
    length = terrain_length(prof, course_length, L)
    noise = 0.0 if params.rigid else terrain_noise
    terrain = TerrainField.noisy(length, noise, seed, cell_size)
    pressure = 0.0 if params.rigid else load / (area * params.adaptation_factor) / params.bearing_stiffness
    kern = _kernels.get_backend(backend)
    lengths, pitches, outcomes, rear, n, reason, err = kern.run_strides(
        terrain.depth, terrain.load_count, float(cell_size), float(L), float(prof.land_length),
        float(prof.advance), float(pressure), float(params.feedback_gain),
        float(params.effective_slip), float(prof.frame.com[0]), float(prof.frame.com[1]),
        0.0, float(course_length), int(max_strides), STUCK_STRIDES)
    if err == _kernels.ERR_SINKAGE:
        raise ExcessiveSinkage(f"sinkage reached the segment length {L} m at stride {n}")
    cx = rest_com(gait)[0]
    rear = np.asarray(rear[:n + 1])
    records = tuple(
        StepRecord(k, float(lengths[k]), float(pitches[k]),
                   Outcome.ADVANCE if outcomes[k] == 1 else Outcome.OSCILLATE,
                   float(rear[k + 1] + cx))
        for k in range(n))
    summary = summarize_run(records, rear, _STOP_NAMES[int(reason)], gait.stride_period)
    per_stride = int(round(gait.stride_period * sample_rate))
    js = int(round(prof.switch_phase * per_stride))
    switch_times = (np.arange(n) * per_stride + js) / sample_rate
    traj = None
    if log:
        traj = synthesize_log(gait, records, rear, sample_rate,
                              {"shape": gait.name, "substrate": "rigid" if params.rigid else "sand"})
    return SimResult(traj, records, summary, terrain, switch_times, prof)


@functools.lru_cache(maxsize=16)
def _stride_frames(gait: Gait, per_stride: int) -> tuple:
    """Body shapes over one stride in support-frame coordinates.

    Returns:
        (before, stay, roll): ``before`` holds samples up to and including the
        switch, posed on segment 0. ``stay`` holds the later samples when the
        switch fails, still on segment 0. ``roll`` holds the later samples
        after a successful tip, posed on the pivot segment and easing toward
        the relabelled rest shape.
    """
    prof = rolling_profile(gait)
    n_j = gait.joint_count
    L = gait.segment_length
    js = int(round(prof.switch_phase * per_stride))

    def posed(angles, support):
        return np.array(support_frame(build_chain(n_j, L, angles), support).vertices)

    before = np.array([posed(config_at(gait, j / per_stride), 0) for j in range(js + 1)])
    stay = np.array([posed(config_at(gait, j / per_stride), 0) for j in range(js + 1, per_stride)])
    switch_angles = config_at(gait, prof.switch_phase)
    rest_after = np.roll(np.asarray(config_at(gait, 0.0)), prof.pivot)
    roll = []
    for j in range(js + 1, per_stride):
        w = (j - js) / (per_stride - js)
        roll.append(posed(blend_angles(switch_angles, rest_after, w), prof.pivot))
    return before, stay, np.array(roll).reshape(-1, n_j, 2)


def _rotate(verts: np.ndarray, angle: np.ndarray) -> np.ndarray:
    c = np.cos(angle)[:, None]
    s = np.sin(angle)[:, None]
    x, z = verts[..., 0], verts[..., 1]
    return np.stack((c * x - s * z, s * x + c * z), axis=-1)


def synthesize_log(gait: Gait, records, rear, sample_rate: float = SAMPLE_RATE,
                   metadata: Optional[dict] = None) -> Trajectory:
    """Joint trajectory consistent with a sequence of strides.

    Up to the switch the support tilts linearly from level to the recorded
    pitch about its sinking rear joint, front joint at the surface. After a
    failed switch the tilt relaxes back to level; after a successful one the
    body rests on its next side at the new rear-contact position.
    """
    per_stride = int(round(gait.stride_period * sample_rate))
    before, stay, roll = _stride_frames(gait, per_stride)
    prof = rolling_profile(gait)
    n_j = gait.joint_count
    L = gait.segment_length
    js = before.shape[0] - 1
    n = len(records)
    joints = np.empty((n * per_stride + 1, n_j, 2))
    offset = 0
    ramp_up = np.arange(js + 1) / js if js > 0 else np.ones(1)
    ramp_down = 1.0 - np.arange(1, per_stride - js) / (per_stride - js)
    for k, rec in enumerate(records):
        b = math.radians(rec.pitch_at_switch)
        base = k * per_stride
        order = (offset + np.arange(n_j)) % n_j
        tilt = b * ramp_up
        pts = _rotate(before, tilt)
        pts[..., 0] += rear[k]
        pts[..., 1] -= (L * np.sin(tilt))[:, None]
        joints[base:base + js + 1][:, order] = pts
        if rec.outcome is Outcome.ADVANCE:
            pts = roll.copy()
            pts[..., 0] += rear[k + 1]
            offset = (offset + prof.pivot) % n_j
        else:
            tilt = b * ramp_down
            pts = _rotate(stay, tilt)
            pts[..., 0] += rear[k]
            pts[..., 1] -= (L * np.sin(tilt))[:, None]
        joints[base + js + 1:base + per_stride][:, order] = pts
    order = (offset + np.arange(n_j)) % n_j
    final = before[0].copy()
    final[:, 0] += rear[n]
    joints[n * per_stride][order] = final
    t = np.arange(joints.shape[0]) / sample_rate
    return make_trajectory(t, joints, metadata)


def records_to_csv(records) -> str:
    lines = ["step,step_length_m,pitch_deg,outcome,com_x_m"]
    for r in records:
        lines.append(f"{r.step_index},{r.step_length!r},{r.pitch_at_switch!r},"
                     f"{r.outcome.value},{r.com_x!r}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce a batch of trials.

    Attributes:
        substrate: Terrain parameters.
        load_n: Robot weight in N.
        width_m: Segment width in meters.
        cell_size_m: Terrain resolution.
        terrain_noise_m: Initial sinkage noise amplitude.
        course_length_m: Course length.
        max_strides: Stride budget per trial.
        seeds: Number of seeds (trials); seeds run 0..seeds-1.
        gait: Gait file path or shipped shape name; None lets the caller choose.
        notes: Free-form provenance.
    """

    substrate: SubstrateParams = field(default_factory=SubstrateParams)
    load_n: float = LOAD_N
    width_m: float = SEGMENT_WIDTH
    cell_size_m: float = CELL_SIZE
    terrain_noise_m: float = 0.0
    course_length_m: float = 1.0
    max_strides: int = MAX_STRIDES
    seeds: int = 1
    gait: Optional[str] = None
    notes: dict = field(default_factory=dict, compare=False)

    def resolve_gait(self, override: Optional[str] = None, base: Optional[Path] = None) -> Gait:
        ref = override or self.gait
        if ref is None:
            raise SchemaError("no gait given: set 'gait' in the scenario or pass a shape")
        if ref in ("hex", "quad", "tri", "hexagon", "quadrilateral", "triangle"):
            return shipped_gait(ref)
        path = Path(ref)
        if not path.is_absolute() and base is not None:
            path = base / path
        return load_gait(path)

    def run_seed(self, gait: Gait, seed: int, log: bool = True,
                 backend: Optional[str] = None) -> SimResult:
        return run(gait, self.substrate, self.max_strides, self.course_length_m, seed,
                   terrain_noise=self.terrain_noise_m, load=self.load_n, width=self.width_m,
                   cell_size=self.cell_size_m, log=log, backend=backend)

    def to_dict(self) -> dict:
        return {
            "substrate": asdict(self.substrate),
            "robot": {"load_n": self.load_n, "width_m": self.width_m},
            "terrain": {"cell_size_m": self.cell_size_m, "noise_amplitude_m": self.terrain_noise_m},
            "course_length_m": self.course_length_m,
            "max_strides": self.max_strides,
            "seeds": self.seeds,
            "gait": self.gait,
            "notes": self.notes,
        }


def scenario_from_dict(data: dict) -> Scenario:
    try:
        sub = dict(data.get("substrate", {}))
        robot = data.get("robot", {})
        terrain = data.get("terrain", {})
        return Scenario(
            substrate=SubstrateParams(**sub),
            load_n=float(robot.get("load_n", LOAD_N)),
            width_m=float(robot.get("width_m", SEGMENT_WIDTH)),
            cell_size_m=float(terrain.get("cell_size_m", CELL_SIZE)),
            terrain_noise_m=float(terrain.get("noise_amplitude_m", 0.0)),
            course_length_m=float(data.get("course_length_m", 1.0)),
            max_strides=int(data.get("max_strides", MAX_STRIDES)),
            seeds=int(data.get("seeds", 1)),
            gait=data.get("gait"),
            notes=dict(data.get("notes", {})),
        )
    except (TypeError, ValueError, AttributeError) as exc:
        raise SchemaError(f"malformed scenario: {exc}") from exc


def load_scenario(path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    return scenario_from_dict(data)


def shipped_scenario(name: str) -> Scenario:
    """Load one of the bundled scenarios: "sand", "sand_adapted" or "rigid"."""
    path = resources.files("sandroll") / "data" / "scenarios" / f"{name}.json"
    if not path.is_file():
        raise ValueError(f"unknown scenario {name!r}")
    return load_scenario(Path(str(path)))
