"""End-effector / instrument pose in the repository frame.

Positions are millimeters, angles degrees. roll is rotation about the
instrument's long axis; the long axis itself is fixed by pitch and yaw
(pitch about y, then yaw about z, applied to +x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import kernels


@dataclass(frozen=True)
class Pose:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0
    roll: float = 0.0

    def __post_init__(self):
        for name in ("x", "y", "z", "pitch", "yaw", "roll"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"non-finite pose field {name}={v!r}")
        for name in ("pitch", "yaw", "roll"):
            object.__setattr__(self, name, kernels.norm_angle(getattr(self, name)))

    def axis(self) -> tuple[float, float, float]:
        """Unit direction of the long axis."""
        return kernels.axis_vector(self.pitch, self.yaw)

    def position(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def to_dict(self) -> dict:
        return {
            "x": self.x, "y": self.y, "z": self.z,
            "pitch": self.pitch, "yaw": self.yaw, "roll": self.roll,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Pose":
        return cls(
            float(d["x"]), float(d["y"]), float(d["z"]),
            float(d["pitch"]), float(d["yaw"]), float(d["roll"]),
        )


def alignment_error(arm_tip: Pose, target: Pose) -> tuple[float, float]:
    """Misalignment of a tip pose against a docking axis.

    Returns (trans_err, tilt_err): lateral Euclidean offset in the plane
    perpendicular to the target's axis, in mm, and the angle between the
    tip's long axis and the target axis, in degrees.
    """
    return kernels.alignment_error(
        arm_tip.x, arm_tip.y, arm_tip.z, arm_tip.pitch, arm_tip.yaw,
        target.x, target.y, target.z, target.pitch, target.yaw,
    )


def axial_depth(arm_tip: Pose, target: Pose) -> float:
    """Signed travel of the tip past the target position along its axis.

    Negative while approaching the bay mouth, positive once inside.
    """
    ax, ay, az = target.axis()
    return kernels.axial_depth(
        arm_tip.x, arm_tip.y, arm_tip.z,
        target.x, target.y, target.z,
        ax, ay, az,
    )
