"""Exception types raised across the toolkit.

Every domain error derives from ``SandrollError`` so the CLI can map them to
exit code 1 in one place.
"""

import numpy as np


class SandrollError(Exception):
    """Base class for all domain errors."""


class InvalidAngle(SandrollError, ValueError):
    """An interior angle lies outside (0, pi]."""


class NonClosingChain(SandrollError, ValueError):
    """The segment walk does not return to its start.

    Attributes:
        residual: (dx, dz, dturn) left over after walking all segments.
    """

    def __init__(self, message: str, residual):
        super().__init__(message)
        self.residual = np.asarray(residual, dtype=float)


class DegenerateSupport(SandrollError, ValueError):
    """The chain cannot rest on the requested segment with its body above it."""


class InvalidShapeParams(SandrollError, ValueError):
    """(alpha, zeta) do not describe a valid parallelogon."""


class EmptyGait(SandrollError, ValueError):
    """A gait has no keyframes, or no switching phases where one is needed."""


class NonPositiveArea(SandrollError, ValueError):
    """A contact area was zero or negative."""


class ExcessiveSinkage(SandrollError, ValueError):
    """Sinkage reached the segment length, so no pitch angle exists."""


class SchemaError(SandrollError, ValueError):
    """A file does not match its expected layout."""


class NonUniformSampling(SandrollError, ValueError):
    """Trajectory timestamps are not evenly spaced."""


class OutOfRange(SandrollError, ValueError):
    """A requested time lies outside the trajectory span."""


class TooShort(SandrollError, ValueError):
    """A trajectory is shorter than one stride."""


class EmptyRecords(SandrollError, ValueError):
    """Statistics were requested for zero steps."""
