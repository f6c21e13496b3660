"""Centrally symmetric hexagons P(alpha, zeta) and their rolling classes.

A parallelogon rests on segment 0 with interior angle ``alpha`` at its rear
contact and ``zeta`` at its front contact; the third angle ``gamma`` follows
from the six exterior turns adding to one revolution. Its centre of mass is
the centre of symmetry, which makes the rolling test a closed form in the two
angles.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import InvalidShapeParams
from .geometry import SEGMENT_LENGTH, ChainShape, build_chain
from .stability import Roll, RollOutcome

ANGLE_TOL = 1e-12
BOUNDARY_BAND = 1e-9

_CODE_TO_ROLL = {_kernels.FORWARD: Roll.FORWARD, _kernels.BACKWARD: Roll.BACKWARD,
                 _kernels.NONE: Roll.NONE}


@dataclass(frozen=True)
class ShapeParams:
    """Parallelogon coordinates in radians; ``gamma`` is implied."""

    alpha: float
    zeta: float

    def __post_init__(self):
        a, z = self.alpha, self.zeta
        g = 2.0 * math.pi - a - z
        ok = (0.0 < a <= math.pi and 0.0 < z <= math.pi
              and ANGLE_TOL < g <= math.pi + ANGLE_TOL)
        if not ok:
            raise InvalidShapeParams(
                f"P({a!r}, {z!r}) needs alpha, zeta, gamma in (0, pi]; gamma = {g!r}")

    @property
    def gamma(self) -> float:
        return min(2.0 * math.pi - self.alpha - self.zeta, math.pi)

    @classmethod
    def from_degrees(cls, alpha: float, zeta: float) -> "ShapeParams":
        return cls(math.radians(alpha), math.radians(zeta))

    def angles(self) -> list:
        """Interior angles at the six joints, starting at the rear contact."""
        return [self.alpha, self.zeta, self.gamma] * 2


def parallelogon(params: ShapeParams, segment_length: float = SEGMENT_LENGTH) -> ChainShape:
    """Build P(alpha, zeta) resting on segment 0."""
    return build_chain(6, segment_length, params.angles())


def _closed_form(params: ShapeParams, incline: float, segment_length: float) -> RollOutcome:
    th = math.radians(incline)
    c = math.cos(th)
    s = math.cos(params.alpha + th) - math.cos(params.zeta - th)
    # the projection's offset past each bound, in meters
    front = segment_length / (2.0 * c) * (s - c)
    back = -segment_length / (2.0 * c) * (s + c)
    if s > c:
        return RollOutcome(Roll.FORWARD, front)
    if s < -c:
        return RollOutcome(Roll.BACKWARD, back)
    return RollOutcome(Roll.NONE, max(front, back))


def classify_level(params: ShapeParams, segment_length: float = SEGMENT_LENGTH) -> RollOutcome:
    """Forward iff cos(alpha) - cos(zeta) > 1, Backward iff it is < -1."""
    return _closed_form(params, 0.0, segment_length)


def classify_slope(params: ShapeParams, incline: float,
                   segment_length: float = SEGMENT_LENGTH) -> RollOutcome:
    """Rolling class on a support tilted ``incline`` degrees uphill.

    Forward (uphill) iff cos(alpha + t) - cos(zeta - t) > cos(t); Backward
    (downhill) iff the same difference is < -cos(t).
    """
    if not 0.0 <= incline < 90.0:
        raise ValueError(f"incline must be in [0, 90) degrees, got {incline}")
    return _closed_form(params, incline, segment_length)


def slope_statistic(alpha, zeta, incline: float):
    """cos(alpha + t) - cos(zeta - t) and cos(t); the decision boundary sits where they match up to sign."""
    th = math.radians(incline)
    return np.cos(np.asarray(alpha) + th) - np.cos(np.asarray(zeta) - th), math.cos(th)


def grid_axis(grid_n: int) -> np.ndarray:
    """Uniform axis over [0, pi]; the zero endpoint is kept only to be marked invalid."""
    if grid_n < 2:
        raise ValueError(f"grid_n must be >= 2, got {grid_n}")
    return np.linspace(0.0, math.pi, grid_n)


@dataclass(frozen=True, eq=False)
class ClassificationMap:
    """Rolling class of every (alpha, zeta) grid point.

    Arrays are indexed [alpha_index, zeta_index]. Invalid cells carry
    ``valid == False`` and are never counted.
    """

    grid_n: int
    incline: float
    alpha: np.ndarray
    zeta: np.ndarray
    valid: np.ndarray
    outcome: np.ndarray
    margin: np.ndarray

    @property
    def counts(self) -> dict:
        v = self.valid
        return {
            "forward": int(np.count_nonzero(v & (self.outcome == _kernels.FORWARD))),
            "backward": int(np.count_nonzero(v & (self.outcome == _kernels.BACKWARD))),
            "none": int(np.count_nonzero(v & (self.outcome == _kernels.NONE))),
            "invalid": int(np.count_nonzero(~v)),
        }

    def lookup(self, alpha: float, zeta: float) -> Optional[Roll]:
        """Class of the grid point nearest (alpha, zeta) radians, None if invalid."""
        i = int(np.argmin(np.abs(self.alpha - alpha)))
        j = int(np.argmin(np.abs(self.zeta - zeta)))
        if not self.valid[i, j]:
            return None
        return _CODE_TO_ROLL[int(self.outcome[i, j])]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha_rad", "zeta_rad", "valid", "outcome", "margin_m"])
        for i, a in enumerate(self.alpha):
            for j, z in enumerate(self.zeta):
                if self.valid[i, j]:
                    label = _CODE_TO_ROLL[int(self.outcome[i, j])].value
                    w.writerow([repr(float(a)), repr(float(z)), 1, label,
                                repr(float(self.margin[i, j]))])
                else:
                    w.writerow([repr(float(a)), repr(float(z)), 0, "", ""])
        return buf.getvalue()


def sweep(grid_n: int, incline: float, segment_length: float = SEGMENT_LENGTH,
          backend: Optional[str] = None) -> ClassificationMap:
    """Closed-form classification over a grid_n x grid_n (alpha, zeta) grid.

    Args:
        grid_n: Points per axis, at least 2.
        incline: Uphill inclination in degrees.
        segment_length: Scales the margins only.
        backend: "numba" or "numpy"; None follows the environment.
    """
    axis = grid_axis(grid_n)
    k = _kernels.get_backend(backend)
    valid, outcome, margin = k.closed_form_sweep(axis, axis, math.radians(incline),
                                                 float(segment_length))
    return ClassificationMap(grid_n, float(incline), axis, axis.copy(),
                             np.asarray(valid, dtype=bool), np.asarray(outcome),
                             np.asarray(margin))


def projection_sweep(grid_n: int, incline: float, segment_length: float = SEGMENT_LENGTH,
                     backend: Optional[str] = None) -> ClassificationMap:
    """Same grid classified by walking each chain and projecting its centroid.

    This never uses the closed form; it is the independent route the
    closed form is checked against.
    """
    axis = grid_axis(grid_n)
    a, z = np.meshgrid(axis, axis, indexing="ij")
    g = 2.0 * math.pi - a - z
    valid = (a > 0.0) & (z > 0.0) & (g > ANGLE_TOL) & (g <= math.pi + ANGLE_TOL)
    g = np.minimum(g, math.pi)
    rows = np.stack([a, z, g, a, z, g], axis=-1)[valid]
    k = _kernels.get_backend(backend)
    out, marg, _ = k.batch_roll(np.ascontiguousarray(rows), float(segment_length), 0,
                                math.radians(incline))
    outcome = np.zeros(valid.shape, dtype=np.int8)
    margin = np.zeros(valid.shape)
    outcome[valid] = out
    margin[valid] = marg
    return ClassificationMap(grid_n, float(incline), axis, axis.copy(), valid, outcome, margin)


def boundary_band(cmap: ClassificationMap, band: float = BOUNDARY_BAND) -> np.ndarray:
    """Cells whose closed-form statistic lies within ``band`` of a decision boundary."""
    a, z = np.meshgrid(cmap.alpha, cmap.zeta, indexing="ij")
    s, c = slope_statistic(a, z, cmap.incline)
    return (np.abs(s - c) < band) | (np.abs(s + c) < band)
