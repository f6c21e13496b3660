"""Planar closed chains of equal-length segments.

Conventions: joint ``i`` sits at vertex ``v_i`` and segment ``i`` runs from
``v_i`` to ``v_{i+1}``. The walk starts at the origin heading along +x and
turns counter-clockwise by ``pi - interior_angles[i]`` at every vertex, so the
body lies to the left of (above) each segment.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateSupport, InvalidAngle, NonClosingChain

SEGMENT_COUNT = 6
SEGMENT_LENGTH = 0.056  # m, joint-axis spacing of the robot
SEGMENT_WIDTH = 0.072  # m, metadata only in the planar model

CLOSURE_TOL = 1e-6  # m
TURN_TOL = 1e-9  # rad


@dataclass(frozen=True, eq=False)
class ChainShape:
    """A closed chain with its vertices already walked out.

    Attributes:
        segment_count: Number of segments (and joints).
        segment_length: Length of every segment in meters.
        interior_angles: Interior angle at each joint in radians.
        vertices: (segment_count, 2) array of joint positions in meters.
        width: Segment width in meters; carried along but never used.
    """

    segment_count: int
    segment_length: float
    interior_angles: tuple
    vertices: np.ndarray
    width: float = field(default=SEGMENT_WIDTH)

    def transformed(self, angle: float, offset=(0.0, 0.0)) -> "ChainShape":
        """Return a copy rotated by ``angle`` radians about the origin, then shifted."""
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        verts = self.vertices @ rot.T + np.asarray(offset, dtype=float)
        verts.setflags(write=False)
        return ChainShape(self.segment_count, self.segment_length,
                          self.interior_angles, verts, self.width)


@dataclass(frozen=True, eq=False)
class SupportFrame:
    """A chain posed on one of its segments.

    The supporting segment runs from (0, 0) to (segment_length, 0) and the
    body sits at z > 0.

    Attributes:
        com: (x_c, z_c) in meters.
        ersp: (x_l, x_u), the stretch of ground the support covers.
        support_index: Which segment is supporting.
        vertices: Joint positions in this frame, in the shape's own order.
    """

    com: tuple
    ersp: tuple
    support_index: int
    vertices: np.ndarray


def walk(interior_angles: Sequence[float], segment_length: float = 1.0):
    """Walk the segments without validating closure.

    Returns:
        (vertices, residual) where vertices is (n, 2) and residual is
        (dx, dz, dturn): the gap between the walk's end and its start, and the
        total turn minus 2*pi.
    """
    a = np.asarray(interior_angles, dtype=float)
    n = a.size
    turns = np.pi - a
    # segment 0 heads along +x; the turn at v_0 only closes the loop
    heading = np.concatenate(([0.0], np.cumsum(turns[1:])))
    steps = segment_length * np.column_stack((np.cos(heading), np.sin(heading)))
    pts = np.vstack((np.zeros((1, 2)), np.cumsum(steps, axis=0)))
    residual = np.array([pts[n, 0], pts[n, 1], turns.sum() - 2.0 * np.pi])
    return pts[:n], residual


def build_chain(segment_count: int, segment_length: float,
                interior_angles: Sequence[float]) -> ChainShape:
    """Build a closed chain from its interior angles.

    Args:
        segment_count: Number of segments, at least 3.
        segment_length: Segment length in meters, positive.
        interior_angles: One angle per joint, each in (0, pi].

    Returns:
        The ChainShape with vertices walked from the origin.

    Raises:
        InvalidAngle: An angle lies outside (0, pi].
        NonClosingChain: The walk misses its start by more than 1e-6 m, or
            the exterior turns do not add up to one full revolution.
    """
    if segment_count < 3:
        raise ValueError(f"segment_count must be >= 3, got {segment_count}")
    if not segment_length > 0:
        raise ValueError(f"segment_length must be positive, got {segment_length}")
    angles = tuple(float(a) for a in interior_angles)
    if len(angles) != segment_count:
        raise ValueError(f"expected {segment_count} angles, got {len(angles)}")
    for i, a in enumerate(angles):
        if not (0.0 < a <= math.pi):
            raise InvalidAngle(f"interior angle {i} = {a!r} rad is outside (0, pi]")

    verts, residual = walk(angles, segment_length)
    gap = math.hypot(residual[0], residual[1])
    if gap > CLOSURE_TOL or abs(residual[2]) > TURN_TOL:
        raise NonClosingChain(
            f"chain does not close: position gap {gap:.3e} m, "
            f"turn excess {residual[2]:.3e} rad", residual)
    verts.setflags(write=False)
    return ChainShape(segment_count, float(segment_length), angles, verts)


def chain_com(shape: ChainShape) -> np.ndarray:
    """Unweighted mean of the joint positions."""
    return np.asarray(shape.vertices, dtype=float).mean(axis=0)


def support_frame(shape: ChainShape, support_index: int) -> SupportFrame:
    """Pose ``shape`` resting on segment ``support_index``.

    Raises:
        DegenerateSupport: The chain is flat along the support line, or its
            body would sit below the support.
    """
    n = shape.segment_count
    if not 0 <= support_index < n:
        raise IndexError(f"support_index {support_index} outside [0, {n})")
    verts = np.asarray(shape.vertices, dtype=float)
    p = verts[support_index]
    d = verts[(support_index + 1) % n] - p
    heading = math.atan2(d[1], d[0])
    c, s = math.cos(heading), math.sin(heading)
    # rotate by -heading about p
    rel = verts - p
    local = np.column_stack((c * rel[:, 0] + s * rel[:, 1],
                             -s * rel[:, 0] + c * rel[:, 1]))
    # pin the support endpoints so identity poses stay exact
    local[support_index] = (0.0, 0.0)
    local[(support_index + 1) % n, 1] = 0.0
    if np.all(np.abs(local[:, 1]) <= 1e-12 * shape.segment_length):
        raise DegenerateSupport("chain lies entirely on the support line")
    com = local.mean(axis=0)
    if com[1] <= 0.0:
        raise DegenerateSupport(f"centre of mass height {com[1]:.3e} m is not above the support")
    local.setflags(write=False)
    return SupportFrame(com=(float(com[0]), float(com[1])),
                        ersp=(0.0, float(shape.segment_length)),
                        support_index=support_index, vertices=local)


def shape_to_dict(shape: ChainShape) -> dict:
    return {
        "segment_count": shape.segment_count,
        "segment_length_m": shape.segment_length,
        "interior_angles_rad": list(shape.interior_angles),
    }


def shape_from_dict(data: dict) -> ChainShape:
    return build_chain(int(data["segment_count"]), float(data["segment_length_m"]),
                       data["interior_angles_rad"])


def load_shape(path) -> ChainShape:
    return shape_from_dict(json.loads(Path(path).read_text()))
