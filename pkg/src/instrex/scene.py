"""Simulated world: arm tip, two-bay instrument repository, instruments,
base stability flag, fixed-step clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from . import kernels
from .pose import Pose


class SceneError(ValueError):
    """Invalid scene configuration or command."""


@dataclass(frozen=True)
class SceneConfig:
    home: Pose = Pose(x=-400.0, y=0.0, z=100.0)
    bay_poses: tuple[Pose, Pose] = (
        Pose(x=0.0, y=-60.0, z=100.0),
        Pose(x=0.0, y=60.0, z=100.0),
    )
    # (instrument id, bay index) initially stowed
    instruments: tuple[tuple[str, int], ...] = (("instr-0", 0),)
    dt: float = 0.01
    max_step_mm: float = 5.0
    max_rot_deg: float = 2.0
    slip_bias_mm: float = 1.0
    slot_depth_mm: float = 20.0
    withdraw_clearance_mm: float = 30.0
    approach_corridor_mm: float = 20.0


@dataclass
class DockingBay:
    id: int
    slot_pose: Pose
    occupied_by: str | None = None
    limit_switch_pressed: bool = False


@dataclass
class Instrument:
    id: str
    base_pose: Pose
    # "stowed:<bay>", "carried" or "ejected"
    state: str = "carried"

    def stowed_bay(self) -> int | None:
        if self.state.startswith("stowed:"):
            return int(self.state.split(":", 1)[1])
        return None


@dataclass
class SceneState:
    config: SceneConfig
    arm_tip: Pose
    bays: list[DockingBay]
    instruments: list[Instrument]
    base_stable: bool = True
    tick: int = 0
    # feed axis / slip direction for the currently targeted bay
    feed_axis: tuple[float, float, float] = (1.0, 0.0, 0.0)
    slip_dir: tuple[float, float, float] = (0.0, 1.0, 0.0)

    @property
    def sim_time(self) -> float:
        return self.tick * self.config.dt

    def bay(self, bay_id: int) -> DockingBay:
        return self.bays[bay_id]

    def instrument(self, instrument_id: str) -> Instrument:
        for ins in self.instruments:
            if ins.id == instrument_id:
                return ins
        raise SceneError(f"unknown instrument {instrument_id!r}")

    def carried_instrument(self) -> Instrument | None:
        for ins in self.instruments:
            if ins.state == "carried":
                return ins
        return None

    def set_target_bay(self, bay_id: int) -> None:
        """Select the bay whose axis 'axial feed' commands act along."""
        bay = self.bays[bay_id]
        ax, ay, az = bay.slot_pose.axis()
        self.feed_axis = (ax, ay, az)
        # horizontal unit perpendicular to the feed axis; bay axes are
        # horizontal by construction so this never degenerates in practice
        n = math.sqrt(ax * ax + ay * ay)
        if n > 1e-9:
            self.slip_dir = (-ay / n, ax / n, 0.0)
        else:
            self.slip_dir = (0.0, 1.0, 0.0)

    def copy(self) -> "SceneState":
        return SceneState(
            config=self.config,
            arm_tip=self.arm_tip,
            bays=[replace(b) for b in self.bays],
            instruments=[replace(i) for i in self.instruments],
            base_stable=self.base_stable,
            tick=self.tick,
            feed_axis=self.feed_axis,
            slip_dir=self.slip_dir,
        )


def new_scene(config: SceneConfig) -> SceneState:
    if len(config.bay_poses) != 2:
        raise SceneError("a repository has exactly two docking bays")
    b0, b1 = config.bay_poses
    if b0.position() == b1.position():
        raise SceneError("bay poses must be distinct")
    if len(config.instruments) > 2:
        raise SceneError(
            f"at most 2 instruments fit the repository, got {len(config.instruments)}"
        )
    bays = [DockingBay(id=i, slot_pose=p) for i, p in enumerate(config.bay_poses)]
    instruments = []
    for ins_id, bay_id in config.instruments:
        if bay_id not in (0, 1):
            raise SceneError(f"instrument {ins_id!r}: bay index {bay_id} out of range")
        if bays[bay_id].occupied_by is not None:
            raise SceneError(f"bay {bay_id} assigned twice")
        bays[bay_id].occupied_by = ins_id
        instruments.append(
            Instrument(id=ins_id, base_pose=bays[bay_id].slot_pose,
                       state=f"stowed:{bay_id}")
        )
    scene = SceneState(
        config=config,
        arm_tip=config.home,
        bays=bays,
        instruments=instruments,
    )
    scene.set_target_bay(0)
    return scene


def apply_command(scene: SceneState, delta: Pose, axial_feed: float = 0.0) -> SceneState:
    """Advance the scene one tick under a (clamped) pose command.

    Mutates and returns the scene. When the base is unstable every applied
    delta is additionally biased laterally by slip_bias_mm per tick.
    """
    for name, v in (("axial_feed", axial_feed),):
        if not math.isfinite(v):
            raise SceneError(f"non-finite command field {name}={v!r}")
    cfg = scene.config
    tip = scene.arm_tip
    ax, ay, az = scene.feed_axis
    slip = cfg.slip_bias_mm if not scene.base_stable else 0.0
    bx, by, bz = scene.slip_dir
    x, y, z, pitch, yaw, roll = kernels.step_pose(
        tip.x, tip.y, tip.z, tip.pitch, tip.yaw, tip.roll,
        delta.x, delta.y, delta.z, delta.pitch, delta.yaw, delta.roll,
        axial_feed, ax, ay, az,
        cfg.max_step_mm, cfg.max_rot_deg,
        slip, bx, by, bz,
    )
    new_tip = Pose(x, y, z, pitch, yaw, roll)
    scene.arm_tip = new_tip
    carried = scene.carried_instrument()
    if carried is not None:
        carried.base_pose = new_tip
    scene.tick += 1
    return scene
