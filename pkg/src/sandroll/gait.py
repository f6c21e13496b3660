"""Cyclic joint-angle gaits and the configurations at which support transfers.

Keyframe angles are listed relative to the current support: joint 0 is the
rear contact and joint 1 the front contact of the segment the body rests on
at the start of the stride. After a successful switch the labels shift by the
pivot index, so one stride of data describes the whole roll.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyGait, SchemaError
from .geometry import SEGMENT_LENGTH, ChainShape, SupportFrame, build_chain, support_frame, walk
from .stability import Roll, critical_pitch, roll_outcome

STRIDE_PERIOD = 3.0  # s
STRAIGHT_TOL = 1e-12
GROUND_TOL = 1e-9  # relative to segment length

SHIPPED = {"hex": "hexagon", "quad": "quadrilateral", "tri": "triangle"}


@dataclass(frozen=True)
class Keyframe:
    phase: float
    interior_angles: tuple


@dataclass(frozen=True)
class Gait:
    """An immutable, validated gait.

    Attributes:
        name: Label, e.g. "hexagon".
        keyframes: Keyframes sorted by strictly increasing phase in [0, 1).
        stride_period: Seconds per cycle.
        switching_phases: Phases at which support transfer is attempted.
        segment_length: Segment length in meters.
    """

    name: str
    keyframes: tuple
    stride_period: float = STRIDE_PERIOD
    switching_phases: tuple = ()
    segment_length: float = SEGMENT_LENGTH
    extra: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if not self.keyframes:
            raise EmptyGait(f"gait {self.name!r} has no keyframes")
        phases = [k.phase for k in self.keyframes]
        if any(not 0.0 <= p < 1.0 for p in phases):
            raise SchemaError(f"gait {self.name!r}: keyframe phases must lie in [0, 1)")
        if any(b <= a for a, b in zip(phases, phases[1:])):
            raise SchemaError(f"gait {self.name!r}: keyframe phases must strictly increase")
        if any(not 0.0 <= p < 1.0 for p in self.switching_phases):
            raise SchemaError(f"gait {self.name!r}: switching phases must lie in [0, 1)")
        if not self.stride_period > 0:
            raise SchemaError(f"gait {self.name!r}: stride period must be positive")
        n = len(self.keyframes[0].interior_angles)
        for k in self.keyframes:
            if len(k.interior_angles) != n:
                raise SchemaError(f"gait {self.name!r}: keyframes differ in joint count")
            build_chain(n, self.segment_length, k.interior_angles)

    @property
    def joint_count(self) -> int:
        return len(self.keyframes[0].interior_angles)


def closure_residual(angles: Sequence[float]) -> np.ndarray:
    """(dx, dz, dturn) of a unit-segment walk; zero for a closed chain."""
    return walk(angles, 1.0)[1]


def _closure_jacobian(angles: np.ndarray) -> np.ndarray:
    n = angles.size
    heading = np.concatenate(([0.0], np.cumsum(np.pi - angles[1:])))
    # raising a_j lowers every heading from segment j onward
    sin_tail = np.cumsum(np.sin(heading)[::-1])[::-1]
    cos_tail = np.cumsum(np.cos(heading)[::-1])[::-1]
    jac = np.zeros((3, n))
    jac[0, 1:] = sin_tail[1:]
    jac[1, 1:] = -cos_tail[1:]
    jac[2, :] = -1.0
    return jac


def project_closure(angles: Sequence[float], fixed: Sequence[int] = (),
                    tol: float = 1e-14, max_iter: int = 50) -> np.ndarray:
    """Smallest angle change that closes the chain.

    Gauss-Newton on the three closure conditions (two position, one total
    turn), taking the minimum-norm correction over the joints not listed in
    ``fixed``. When only the turn sum is off, the first step spreads the
    excess equally over the free joints.

    Raises:
        ValueError: Fewer than three free joints, or no convergence.
    """
    a = np.array(angles, dtype=float)
    free = np.array([i for i in range(a.size) if i not in set(fixed)], dtype=int)
    if free.size < 3:
        raise ValueError("closure needs at least three free joints")
    for _ in range(max_iter):
        r = closure_residual(a)
        if np.max(np.abs(r)) < tol:
            return a
        j = _closure_jacobian(a)[:, free]
        a[free] -= j.T @ np.linalg.solve(j @ j.T, r)
    r = closure_residual(a)
    if np.max(np.abs(r)) < 1e-12:
        return a
    raise ValueError(f"closure projection did not converge, residual {r}")


def config_at(gait: Gait, phase: float) -> tuple:
    """Interior angles at ``phase``, cyclically interpolated and closed.

    Angles are blended linearly between the bracketing keyframes. Joints that
    are straight in the blend stay exactly straight; the others absorb any
    closure error through ``project_closure``.
    """
    kfs = gait.keyframes
    if not kfs:
        raise EmptyGait(f"gait {gait.name!r} has no keyframes")
    phase = phase % 1.0
    if len(kfs) == 1:
        return kfs[0].interior_angles
    phases = [k.phase for k in kfs]
    i = int(np.searchsorted(phases, phase, side="right")) - 1
    lo = kfs[i]
    hi = kfs[(i + 1) % len(kfs)]
    if i < 0:
        # before the first keyframe: still on the wrap-around span
        lo = kfs[-1]
        span = phases[0] + 1.0 - lo.phase
        w = (phase + 1.0 - lo.phase) / span
    else:
        span = (hi.phase - lo.phase) % 1.0 or 1.0
        w = (phase - lo.phase) / span
    if w == 0.0:
        return lo.interior_angles
    return blend_angles(lo.interior_angles, hi.interior_angles, w)


def blend_angles(start: Sequence[float], end: Sequence[float], w: float) -> tuple:
    """Linear blend ``(1 - w) * start + w * end`` re-projected onto closure.

    Straight joints stay exactly straight. If the projection pushes a joint
    past straight, that joint is pinned straight too and the rest re-solved.
    """
    a = (1.0 - w) * np.asarray(start, dtype=float) + w * np.asarray(end, dtype=float)
    for _ in range(a.size):
        straight = np.flatnonzero(a >= math.pi - STRAIGHT_TOL)
        a[straight] = math.pi
        if np.max(np.abs(closure_residual(a))) <= 1e-13:
            break
        a = project_closure(a, fixed=straight)
        if np.all(a <= math.pi):
            break
    return tuple(float(x) for x in a)


def shape_at(gait: Gait, phase: float) -> ChainShape:
    return build_chain(gait.joint_count, gait.segment_length, config_at(gait, phase))


@dataclass(frozen=True, eq=False)
class SwitchingConfig:
    """Shape at a switching phase, posed on its outgoing support (segment 0)."""

    phase: float
    shape: ChainShape
    support_index: int
    frame: SupportFrame


def switching_configs(gait: Gait) -> list:
    """One posed configuration per switching phase.

    Raises:
        EmptyGait: The gait lists no switching phases.
    """
    if not gait.switching_phases:
        raise EmptyGait(f"gait {gait.name!r} has no switching phases")
    out = []
    for ph in gait.switching_phases:
        shape = shape_at(gait, ph)
        out.append(SwitchingConfig(ph, shape, 0, support_frame(shape, 0)))
    return out


def pivot_index(frame: SupportFrame, segment_length: float) -> int:
    """Front-most joint lying on the support line; the body tips about it."""
    v = frame.vertices
    on_ground = np.flatnonzero(np.abs(v[:, 1]) <= GROUND_TOL * segment_length)
    return int(on_ground[np.argmax(v[on_ground, 0])])


def tip_advance(frame: SupportFrame, segment_length: float) -> float:
    """How far ahead of the old rear contact the next support's rear joint sits."""
    return float(frame.vertices[pivot_index(frame, segment_length), 0])


def landing_length(shape: ChainShape, frame: SupportFrame) -> float:
    """Length of the straight side that touches down after the tip."""
    n = shape.segment_count
    p = pivot_index(frame, shape.segment_length)
    count = 1
    j = (p + 1) % n
    while count < n and shape.interior_angles[j] >= math.pi - STRAIGHT_TOL:
        count += 1
        j = (j + 1) % n
    return count * shape.segment_length


def switch_advances(gait: Gait) -> list:
    """Rigid-ground advance of each switching event (0 if it cannot tip forward)."""
    out = []
    for cfg in switching_configs(gait):
        if roll_outcome(cfg.frame, 0.0).direction is Roll.FORWARD:
            out.append(tip_advance(cfg.frame, gait.segment_length))
        else:
            out.append(0.0)
    return out


def geometric_step_length(gait: Gait) -> float:
    """Mean no-slip advance per switching event on rigid flat ground.

    A gait without switching phases never transfers support and returns 0.
    """
    if not gait.keyframes:
        raise EmptyGait(f"gait {gait.name!r} has no keyframes")
    if not gait.switching_phases:
        return 0.0
    adv = switch_advances(gait)
    return float(sum(adv) / len(adv))


@dataclass(frozen=True, eq=False)
class RollingProfile:
    """What the simulator needs to know about a single-switch gait."""

    switch_phase: float
    frame: SupportFrame
    beta_m: float | None
    pivot: int
    advance: float
    land_length: float


@functools.lru_cache(maxsize=64)
def rolling_profile(gait: Gait) -> RollingProfile:
    """Summarize the gait's one switching event.

    Raises:
        EmptyGait: No switching phase.
        ValueError: More than one switching phase per stride.
    """
    cfgs = switching_configs(gait)
    if len(cfgs) != 1:
        raise ValueError(f"gait {gait.name!r}: the simulator needs exactly one switching phase "
                         f"per stride, got {len(cfgs)}")
    cfg = cfgs[0]
    L = gait.segment_length
    return RollingProfile(
        switch_phase=cfg.phase,
        frame=cfg.frame,
        beta_m=critical_pitch(cfg.frame).beta_m,
        pivot=pivot_index(cfg.frame, L),
        advance=tip_advance(cfg.frame, L),
        land_length=landing_length(cfg.shape, cfg.frame),
    )


def gait_from_dict(data: dict) -> Gait:
    try:
        kfs = tuple(Keyframe(float(k["phase"]), tuple(float(a) for a in k["interior_angles_rad"]))
                    for k in data["keyframes"])
        name = str(data["name"])
        period = float(data.get("stride_period_s", STRIDE_PERIOD))
        switching = tuple(float(p) for p in data.get("switching_phases", ()))
        length = float(data.get("segment_length_m", SEGMENT_LENGTH))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed gait description: {exc}") from exc
    if not kfs:
        raise EmptyGait(f"gait {name!r} has no keyframes")
    extra = {k: v for k, v in data.items()
             if k not in ("name", "keyframes", "stride_period_s", "switching_phases",
                          "segment_length_m")}
    return Gait(name, kfs, period, switching, length, extra)


def gait_to_dict(gait: Gait) -> dict:
    out = {
        "name": gait.name,
        "stride_period_s": gait.stride_period,
        "segment_length_m": gait.segment_length,
        "keyframes": [{"phase": k.phase, "interior_angles_rad": list(k.interior_angles)}
                      for k in gait.keyframes],
        "switching_phases": list(gait.switching_phases),
    }
    out.update(gait.extra)
    return out


def load_gait(path) -> Gait:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    return gait_from_dict(data)


def shipped_gait_path(shape: str) -> Path:
    name = SHIPPED.get(shape, shape)
    if name not in SHIPPED.values():
        raise ValueError(f"unknown shape {shape!r}; choose from {sorted(SHIPPED)}")
    return Path(str(resources.files("sandroll") / "data" / "gaits" / f"{name}.json"))


@functools.lru_cache(maxsize=8)
def shipped_gait(shape: str) -> Gait:
    """Load a calibrated gait by short ("hex") or long ("hexagon") name."""
    return load_gait(shipped_gait_path(shape))
