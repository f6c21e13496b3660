"""Joint-trajectory logs: loading, stride segmentation and trial statistics.

Logs hold the planar positions of the six joints, sampled uniformly. The
same CSV layout is written by the simulator and read here, so simulated and
recorded trials go through one pipeline.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyRecords, NonUniformSampling, OutOfRange, SchemaError, TooShort

JOINTS = 6
HEADER = ["t_s"] + [f"j{i}{ax}" for i in range(1, JOINTS + 1) for ax in ("x", "z")]
SAMPLE_RATE = 120.0  # Hz, matches the motion-capture rate
SUCCESS_STEP = 0.02  # m, shorter strides count as failing
FAILURE_DISTANCE = 0.20  # m
STUCK_STRIDES = 2
DEBOUNCE_S = 0.1
TIME_TOL = 1e-6
TIE_TOL = 1e-9  # m, segments this close in height count as equally low


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled joint positions.

    Attributes:
        t: (n,) timestamps in seconds.
        joints: (n, 6, 2) joint (x, z) positions in meters, physical joint order.
        sample_rate: Hz.
        metadata: Free-form labels such as shape and substrate.
    """

    t: np.ndarray
    joints: np.ndarray
    sample_rate: float
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.t.size

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def index_at(self, time: float) -> int:
        """Nearest sample index to ``time``.

        Raises:
            OutOfRange: ``time`` lies outside the recorded span.
        """
        half = 0.5 / self.sample_rate
        if time < self.t[0] - half or time > self.t[-1] + half:
            raise OutOfRange(f"time {time} s outside [{self.t[0]}, {self.t[-1]}] s")
        return int(np.clip(np.rint((time - self.t[0]) * self.sample_rate), 0, self.t.size - 1))

    def to_csv(self) -> str:
        flat = np.column_stack((self.t, self.joints.reshape(len(self.t), -1)))
        buf = io.StringIO()
        buf.write(",".join(HEADER) + "\n")
        np.savetxt(buf, flat, fmt="%.17g", delimiter=",")
        return buf.getvalue()


def make_trajectory(t, joints, metadata: Optional[dict] = None) -> Trajectory:
    """Validate arrays and wrap them as a Trajectory.

    Raises:
        SchemaError: Wrong shapes or fewer than two samples.
        NonUniformSampling: Any interval differs from the median by over 1e-6 s.
    """
    t = np.asarray(t, dtype=float)
    joints = np.asarray(joints, dtype=float)
    if t.ndim != 1 or joints.shape != (t.size, JOINTS, 2):
        raise SchemaError(f"expected {JOINTS} joints per sample, got array shape {joints.shape}")
    if t.size < 2:
        raise SchemaError("a trajectory needs at least two samples")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(joints))):
        raise SchemaError("trajectory contains non-finite values")
    dt = np.diff(t)
    step = float(np.median(dt))
    if step <= 0 or np.max(np.abs(dt - step)) > TIME_TOL:
        raise NonUniformSampling(
            f"timestamps are not uniform: intervals range {dt.min():.6g} to {dt.max():.6g} s")
    t.setflags(write=False)
    joints.setflags(write=False)
    return Trajectory(t, joints, 1.0 / step, dict(metadata or {}))


def load_trajectory(path) -> Trajectory:
    """Read a trajectory CSV (header ``t_s,j1x,j1z,...,j6x,j6z``).

    Raises:
        SchemaError: Missing or misnamed columns, or unparsable values.
        NonUniformSampling: Uneven timestamps.
    """
    text = Path(path).read_text()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if header != HEADER:
        raise SchemaError(f"{path}: expected columns {','.join(HEADER)}, got {','.join(header)}")
    body = [r for r in rows[1:] if r]
    try:
        data = np.array(body, dtype=float)
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric or ragged rows ({exc})") from exc
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != len(HEADER):
        raise SchemaError(f"{path}: need at least two rows of {len(HEADER)} values")
    return make_trajectory(data[:, 0], data[:, 1:].reshape(-1, JOINTS, 2),
                           {"source": str(path)})


def com_series(traj: Trajectory) -> np.ndarray:
    """(n, 2) centroid of the joints at every sample."""
    return traj.joints.mean(axis=1)


def segment_heights(joints: np.ndarray) -> np.ndarray:
    """Mean z of every segment; segment i joins joint i and joint i + 1."""
    z = joints[..., 1]
    return 0.5 * (z + np.roll(z, -1, axis=-1))


def lowest_segment(joints: np.ndarray) -> int:
    """Segment with the smallest mean height at one sample.

    Segments within 1e-9 m of the minimum are tied; the front-most (largest
    mean x) of those wins, so a flat two-segment side resolves to its front
    half.
    """
    h = segment_heights(joints)
    tied = np.flatnonzero(h <= h.min() + TIE_TOL)
    if tied.size == 1:
        return int(tied[0])
    x = joints[:, 0]
    mid_x = 0.5 * (x + np.roll(x, -1))
    return int(tied[np.argmax(mid_x[tied])])


def segment_pitch(joints: np.ndarray, segment: int) -> float:
    """Angle of one segment from horizontal in degrees, positive when its leading joint is higher."""
    a = joints[segment]
    b = joints[(segment + 1) % joints.shape[0]]
    lead, trail = (a, b) if a[0] >= b[0] else (b, a)
    dx = lead[0] - trail[0]
    dz = lead[1] - trail[1]
    return math.degrees(math.atan2(dz, dx))


def pitch_at_switch(traj: Trajectory, switch_times: Sequence[float],
                    reference_times: Optional[Sequence[float]] = None) -> np.ndarray:
    """Body pitch at each switching event, in degrees.

    Without ``reference_times`` the measured segment is the lowest one at the
    event itself. With them, the segment is picked as the lowest one at the
    matching reference time (typically the start of the stride, when the
    body rests level on its support) and its angle is read at the event.

    Raises:
        OutOfRange: An event or reference time falls outside the log.
    """
    times = list(switch_times)
    refs = times if reference_times is None else list(reference_times)
    if len(refs) != len(times):
        raise ValueError("reference_times must pair one-to-one with switch_times")
    out = np.empty(len(times))
    for k, (te, tr) in enumerate(zip(times, refs)):
        seg = lowest_segment(traj.joints[traj.index_at(tr)])
        out[k] = segment_pitch(traj.joints[traj.index_at(te)], seg)
    return out


def detect_switches(traj: Trajectory, debounce: float = DEBOUNCE_S) -> np.ndarray:
    """Times at which the lowest segment changes identity.

    A change only counts if the new identity then holds for at least
    ``debounce`` seconds. Each event is stamped at the last sample before the
    change, the final instant of the outgoing support.
    """
    ids = np.array([lowest_segment(j) for j in traj.joints])
    hold = max(1, int(round(debounce * traj.sample_rate)))
    events = []
    current = ids[0]
    i = 1
    n = ids.size
    while i < n:
        if ids[i] != current:
            end = min(n, i + hold)
            if np.all(ids[i:end] == ids[i]) and end - i == hold:
                events.append(traj.t[i - 1])
                current = ids[i]
                i = end
                continue
        i += 1
    return np.array(events)


@dataclass(frozen=True)
class AnalysisStep:
    step: int
    step_length: float
    pitch_deg: float
    success: bool
    event_detected: bool = True


def segment_steps(traj: Trajectory, stride_period: float,
                  switch_times: Optional[Sequence[float]] = None) -> list:
    """Cut the log into strides and measure each one.

    Strides are clocked from the first sample by ``stride_period``. Step
    length is the centroid's x change across the stride. Pitch is read at the
    stride's first switching event, on the segment that supported the body at
    the stride's start. Events come from ``switch_times`` when given, else
    from ``detect_switches``. A stride without an event falls back to its
    largest pitch and is flagged ``event_detected=False``.

    Raises:
        TooShort: Less than one full stride of data.
    """
    t0 = float(traj.t[0])
    n_strides = int(math.floor(traj.duration / stride_period + 1e-9))
    if n_strides < 1:
        raise TooShort(f"log spans {traj.duration:.3f} s, less than one {stride_period} s stride")
    events = np.asarray(detect_switches(traj) if switch_times is None else switch_times, dtype=float)
    com_x = com_series(traj)[:, 0]
    steps = []
    for k in range(n_strides):
        start = t0 + k * stride_period
        end = start + stride_period
        i0, i1 = traj.index_at(start), traj.index_at(end)
        length = float(com_x[i1] - com_x[i0])
        seg = lowest_segment(traj.joints[i0])
        inside = events[(events >= start - TIME_TOL) & (events < end - TIME_TOL)]
        if inside.size:
            pitch = segment_pitch(traj.joints[traj.index_at(float(inside[0]))], seg)
            detected = True
        else:
            window = traj.joints[i0:i1 + 1]
            pitch = max(segment_pitch(j, seg) for j in window)
            detected = False
        steps.append(AnalysisStep(k, length, pitch, length >= SUCCESS_STEP, detected))
    return steps


@dataclass(frozen=True)
class TrialStats:
    """Trial-level statistics over the steps before the stop.

    Attributes:
        mean_speed: m/s over pre-stop steps.
        std: m/s, population standard deviation of per-step speed.
        failure: True if the pre-stop distance is below 0.20 m.
        distance: Pre-stop displacement in meters.
        steps: The pre-stop steps.
        stop_reason: "course", "stuck" or "end".
        stop_index: Number of pre-stop steps.
    """

    mean_speed: float
    std: float
    failure: bool
    distance: float
    steps: tuple
    stop_reason: str
    stop_index: int

    def to_json_dict(self) -> dict:
        return {
            "mean_speed_cm_s": self.mean_speed * 100.0,
            "std_cm_s": self.std * 100.0,
            "failure": self.failure,
            "distance_cm": self.distance * 100.0,
        }


def summarize(records: Sequence, course: float, stride_period: float = 3.0) -> TrialStats:
    """Apply the stopping rules and compute speed statistics.

    A trial stops when its cumulative displacement reaches ``course``, or
    after two consecutive failing strides (shorter than 2 cm); the stuck
    strides themselves are excluded. Speed is step length over stride period,
    averaged over the remaining steps.

    Args:
        records: Objects with a ``step_length`` attribute, in stride order.
        course: Course length in meters.
        stride_period: Seconds per stride.

    Raises:
        EmptyRecords: No records.
    """
    records = list(records)
    if not records:
        raise EmptyRecords("cannot summarize a trial without steps")
    kept = len(records)
    reason = "end"
    travelled = 0.0
    stuck = 0
    for i, r in enumerate(records):
        travelled += r.step_length
        if r.step_length < SUCCESS_STEP:
            stuck += 1
        else:
            stuck = 0
        if travelled >= course - 1e-12:
            kept, reason = i + 1, "course"
            break
        if stuck >= STUCK_STRIDES:
            kept, reason = i + 1 - STUCK_STRIDES, "stuck"
            break
    pre = records[:kept]
    lengths = np.array([r.step_length for r in pre], dtype=float)
    distance = float(lengths.sum()) if lengths.size else 0.0
    if lengths.size:
        speeds = lengths / stride_period
        mean, std = float(speeds.mean()), float(speeds.std())
    else:
        mean, std = 0.0, 0.0
    return TrialStats(mean, std, distance < FAILURE_DISTANCE, distance, tuple(pre), reason, kept)


def steps_to_csv(steps: Sequence[AnalysisStep]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "step_length_m", "pitch_deg", "success"])
    for s in steps:
        w.writerow([s.step, repr(float(s.step_length)), repr(float(s.pitch_deg)),
                    "true" if s.success else "false"])
    return buf.getvalue()
