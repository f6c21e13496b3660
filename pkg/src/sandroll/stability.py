"""Quasi-static rolling predicate on an inclined support.

A chain resting on one segment can tip forward only once the vertical
projection of its centre of mass leaves the stretch of ground covered by
that segment. Tilting the support by an incline slides that projection back
along the segment, so each posed shape has a largest incline at which it can
still tip forward: its critical pitch.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .errors import DegenerateSupport
from .geometry import SupportFrame


class Roll(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    NONE = "none"


@dataclass(frozen=True)
class RollOutcome:
    """Direction a posed chain tips, with its signed margin in meters.

    The margin is positive by how far the projection lies past the crossed
    bound, and negative (distance to the nearest bound) when it stays inside.
    """

    direction: Roll
    margin: float

    @property
    def rolls(self) -> bool:
        return self.direction is not Roll.NONE


@dataclass(frozen=True)
class CriticalPitch:
    """Largest incline in degrees that still lets the shape tip forward.

    ``beta_m`` is None when the shape cannot tip forward even on level ground.
    """

    beta_m: Optional[float]

    @property
    def rolling(self) -> bool:
        return self.beta_m is not None


def gravity_project(point, incline: float) -> float:
    """Project a point along gravity onto an inclined support line.

    Args:
        point: (x_c, z_c) in the support frame, meters, with z_c >= 0.
        incline: Support inclination in degrees; positive means +x points uphill.

    Returns:
        x_p, the support-frame coordinate of the projection.
    """
    x_c, z_c = point
    return x_c - z_c * math.tan(math.radians(incline))


def classify_projection(x_p: float, x_l: float, x_u: float) -> RollOutcome:
    """Strict comparison of a projection against the support interval."""
    if x_p > x_u:
        return RollOutcome(Roll.FORWARD, x_p - x_u)
    if x_p < x_l:
        return RollOutcome(Roll.BACKWARD, x_l - x_p)
    return RollOutcome(Roll.NONE, -min(x_p - x_l, x_u - x_p))


def roll_outcome(frame: SupportFrame, incline: float) -> RollOutcome:
    """Classify which way, if any, the posed chain tips at ``incline`` degrees."""
    x_l, x_u = frame.ersp
    return classify_projection(gravity_project(frame.com, incline), x_l, x_u)


def critical_pitch(frame: SupportFrame) -> CriticalPitch:
    """Incline at which the projection lands exactly on the front bound.

    Raises:
        DegenerateSupport: The centre of mass is not above the support.
    """
    x_c, z_c = frame.com
    if z_c <= 0.0:
        raise DegenerateSupport(f"centre of mass height {z_c!r} m is not above the support")
    x_u = frame.ersp[1]
    if x_c <= x_u:
        return CriticalPitch(None)
    return CriticalPitch(math.degrees(math.atan((x_c - x_u) / z_c)))
