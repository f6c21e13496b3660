"""Quasi-static rolling stability and sand locomotion of a closed-chain robot."""

from .errors import SandrollError
from .gait import Gait, Keyframe, geometric_step_length, load_gait, shipped_gait, switching_configs
from .geometry import ChainShape, SupportFrame, build_chain, chain_com, support_frame
from .shapespace import ClassificationMap, ShapeParams, classify_level, classify_slope, sweep
from .stability import CriticalPitch, Roll, RollOutcome, critical_pitch, gravity_project, roll_outcome
from .substrate import SubstrateParams, TerrainField, run, shipped_scenario
from .trajectory import Trajectory, load_trajectory, segment_steps, summarize

__version__ = "0.1.0"

__all__ = [
    "ChainShape", "ClassificationMap", "CriticalPitch", "Gait", "Keyframe", "Roll", "RollOutcome",
    "SandrollError", "ShapeParams", "SubstrateParams", "SupportFrame", "TerrainField",
    "Trajectory", "build_chain", "chain_com", "classify_level", "classify_slope",
    "critical_pitch", "geometric_step_length", "gravity_project", "load_gait",
    "load_trajectory", "roll_outcome", "run", "segment_steps", "shipped_gait",
    "shipped_scenario", "summarize", "support_frame", "sweep", "switching_configs",
]
