"""One trial session: scene + state machine stepped at the fixed tick.

Shared by the network server (one session per connection) and the
in-process metrics harness (no sockets).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import kernels
from .fsm import FsmState, TrialEvent, start_trial, transition
from .mechanism import InterfaceParams, LatchParams, ToleranceEnvelope
from .pose import Pose
from .protocol import PoseCommand, StateUpdate
from .scene import Instrument, SceneConfig, SceneState, apply_command, new_scene


def make_task_scene(task: str, cfg: SceneConfig | None = None) -> SceneState:
    """Scene whose inventory matches a task's starting condition."""
    cfg = cfg or SceneConfig()
    if task == "attach":
        scene = new_scene(cfg if cfg.instruments else
                          _with_instruments(cfg, (("instr-0", 0),)))
    elif task == "detach":
        scene = new_scene(_with_instruments(cfg, ()))
        scene.instruments.append(
            Instrument(id="instr-0", base_pose=scene.arm_tip, state="carried"))
    elif task == "cycle":
        scene = new_scene(_with_instruments(cfg, (("instr-1", 1),)))
        scene.instruments.append(
            Instrument(id="instr-0", base_pose=scene.arm_tip, state="carried"))
    else:
        raise ValueError(f"unknown task {task!r}")
    return scene


def _with_instruments(cfg: SceneConfig, instruments) -> SceneConfig:
    from dataclasses import replace
    return replace(cfg, instruments=instruments)


@dataclass
class MechanismConfig:
    latch: LatchParams = field(default_factory=LatchParams)
    interface: InterfaceParams = field(default_factory=InterfaceParams)
    envelope: ToleranceEnvelope = field(default_factory=ToleranceEnvelope)


class ExchangeSession:
    """Owns one scene + FSM; all mutation happens through step()."""

    def __init__(self, task: str, scene_cfg: SceneConfig | None = None,
                 mech: MechanismConfig | None = None):
        self.task = task
        self.mech = mech or MechanismConfig()
        self.scene = make_task_scene(task, scene_cfg)
        self.fsm = start_trial(task, self.scene)
        self.events: list[TrialEvent] = []
        self.applied_seq = 0

    @property
    def done(self) -> bool:
        return self.fsm.done

    def step(self, cmd: PoseCommand | None) -> list[TrialEvent]:
        """Advance one tick, applying at most one command."""
        scene = self.scene
        if cmd is not None:
            delta, feed, moved = cmd.delta, cmd.axial_feed, cmd.moved
            self.applied_seq = cmd.seq
        else:
            delta, feed, moved = _ZERO_POSE, 0.0, False
        old = scene.arm_tip
        apply_command(scene, delta, feed)
        tip = scene.arm_tip
        ax, ay, az = scene.feed_axis
        axial_delta = ((tip.x - old.x) * ax + (tip.y - old.y) * ay
                       + (tip.z - old.z) * az)
        events = transition(self.fsm, scene, moved, axial_delta,
                            self.mech.latch, self.mech.interface,
                            self.mech.envelope)
        if events:
            self.events.extend(events)
        return events

    def state_update(self, events: list[TrialEvent],
                     full: bool = True) -> StateUpdate:
        """Snapshot the session as a slave-to-master update.

        full=False omits the bay/instrument snapshots (harness fast path;
        the scripted operators read geometry once from the first update).
        """
        scene = self.scene
        return StateUpdate(
            seq=self.applied_seq,
            sim_time=scene.sim_time,
            arm_tip=scene.arm_tip,
            phase=self.fsm.phase.value,
            failure_mode=self.fsm.failure.value if self.fsm.failure else None,
            bays=[{
                "id": b.id,
                "slot_pose": b.slot_pose.to_dict(),
                "occupied_by": b.occupied_by,
                "limit_switch_pressed": b.limit_switch_pressed,
            } for b in scene.bays] if full else [],
            instruments=[{
                "id": i.id,
                "base_pose": i.base_pose.to_dict(),
                "state": i.state,
            } for i in scene.instruments] if full else [],
            events_since_last=[e.to_json() for e in events],
            base_stable=scene.base_stable,
        )


_ZERO_POSE = Pose()
