"""Deterministic desk-scale simulator of a teleoperated rapid
surgical-instrument-exchange system: docking mechanism gating, exchange
state machine, latency-injecting master-slave protocol, scripted
expert/novice operators and trial metrics.
"""

from .kernels import BACKEND as KERNEL_BACKEND
from .pose import Pose, alignment_error

__version__ = "0.1.0"

__all__ = ["Pose", "alignment_error", "KERNEL_BACKEND", "__version__"]
