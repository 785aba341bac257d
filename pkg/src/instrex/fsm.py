"""Exchange phase state machine: attach path, detach path, full cycle,
failure routing.

The session loop calls `transition` exactly once per tick after the scene
step; all abnormal inputs route to Failed states, never exceptions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import mechanism
from .mechanism import (EngageOutcome, InterfaceParams, LatchParams,
                        ToleranceEnvelope)
from .pose import alignment_error, axial_depth
from .scene import SceneState


class FsmError(ValueError):
    """Scene/task mismatch at trial start."""


class ExchangePhase(enum.Enum):
    # attach path
    ATTACH_IDLE = "attach_idle"
    ALIGNING = "aligning"
    FEEDING = "feeding"
    LOCKED = "locked"
    WITHDRAWING_CARRYING = "withdrawing_carrying"
    # detach path
    CARRYING = "carrying"
    RETURNING = "returning"
    INSERTING = "inserting"
    RELEASE_TRIGGERED = "release_triggered"
    WITHDRAWING_EMPTY = "withdrawing_empty"
    DETACHED = "detached"
    FAILED = "failed"


class FailureMode(enum.Enum):
    TILTED_INSERTION_NO_TRIGGER = "tilted_insertion_no_trigger"
    AXIAL_MISALIGNMENT_COLLISION = "axial_misalignment_collision"
    BASE_SLIPPAGE = "base_slippage"
    ADJACENT_EJECTION = "adjacent_ejection"
    RETRACT_RETRY = "retract_retry"


# net axial retreat (mm) during feed/insert that counts as retract-and-retry
RETRACT_HYSTERESIS_MM = 1.0


@dataclass
class TrialEvent:
    tick: int
    kind: str  # "phase" | "mech" | "failure" | "command"
    payload: dict

    def to_json(self) -> dict:
        return {"tick": self.tick, "kind": self.kind, "payload": self.payload}

    @classmethod
    def from_json(cls, d: dict) -> "TrialEvent":
        return cls(int(d["tick"]), str(d["kind"]), dict(d["payload"]))


@dataclass
class FsmState:
    task: str  # "attach" | "detach" | "cycle"
    phase: ExchangePhase
    target_bay: int
    failure: FailureMode | None = None
    task_complete: bool = False
    clock_start_tick: int | None = None
    # per-segment trackers
    max_depth: float = float("-inf")
    contact_seen: bool = False
    last_depth: float = 0.0

    @property
    def done(self) -> bool:
        return self.task_complete or self.failure is not None


def start_trial(task: str, scene: SceneState) -> FsmState:
    """Arm the state machine for one trial on a consistent scene.

    The trial clock starts on the first movement command, not here.
    """
    if task not in ("attach", "detach", "cycle"):
        raise FsmError(f"unknown task {task!r}")
    carried = scene.carried_instrument()
    occupied = [b.id for b in scene.bays if b.occupied_by is not None]
    empty = [b.id for b in scene.bays if b.occupied_by is None]
    if task == "attach":
        if carried is not None:
            raise FsmError("attach task requires an empty arm")
        if not occupied:
            raise FsmError("attach task requires an occupied bay")
        target, phase = occupied[0], ExchangePhase.ATTACH_IDLE
    elif task == "detach":
        if carried is None:
            raise FsmError("detach task requires a carried instrument")
        if not empty:
            raise FsmError("detach task requires an empty bay")
        target, phase = empty[0], ExchangePhase.CARRYING
    else:
        if carried is None:
            raise FsmError("cycle task requires a carried instrument")
        if len(empty) != 1 or len(occupied) != 1:
            raise FsmError("cycle task requires one empty and one occupied bay")
        target, phase = empty[0], ExchangePhase.CARRYING
    scene.set_target_bay(target)
    return FsmState(task=task, phase=phase, target_bay=target)


def _enter(fsm: FsmState, phase: ExchangePhase, events: list[TrialEvent],
           tick: int) -> None:
    fsm.phase = phase
    events.append(TrialEvent(tick, "phase", {"phase": phase.value}))


def _fail(fsm: FsmState, mode: FailureMode, events: list[TrialEvent],
          tick: int, **detail) -> None:
    events.append(TrialEvent(tick, "failure", {"mode": mode.value, **detail}))
    if fsm.failure is None:
        fsm.failure = mode
        fsm.phase = ExchangePhase.FAILED


def _begin_segment(fsm: FsmState, scene: SceneState, target_bay: int) -> None:
    fsm.target_bay = target_bay
    fsm.max_depth = float("-inf")
    fsm.contact_seen = False
    scene.set_target_bay(target_bay)


def transition(fsm: FsmState, scene: SceneState, moved: bool,
               axial_delta: float, latch: LatchParams,
               iface: InterfaceParams, env: ToleranceEnvelope,
               ) -> list[TrialEvent]:
    """Advance the phase machine one tick; returns the emitted events.

    moved: the tick's command had any nonzero component.
    axial_delta: applied tip displacement along the target bay axis, mm.
    """
    events: list[TrialEvent] = []
    if fsm.done:
        return events

    cfg = scene.config
    bay = scene.bays[fsm.target_bay]
    err = alignment_error(scene.arm_tip, bay.slot_pose)
    depth = axial_depth(scene.arm_tip, bay.slot_pose)
    tick = scene.tick
    phase = fsm.phase

    if phase in (ExchangePhase.ATTACH_IDLE, ExchangePhase.CARRYING):
        if moved:
            nxt = (ExchangePhase.ALIGNING if phase is ExchangePhase.ATTACH_IDLE
                   else ExchangePhase.RETURNING)
            fsm.clock_start_tick = tick
            events.append(TrialEvent(tick, "command", {"first_movement": True}))
            _enter(fsm, nxt, events, tick)
        return events

    if phase in (ExchangePhase.ALIGNING, ExchangePhase.RETURNING):
        if depth >= 0.0 and err[0] > env.collision_trans_threshold:
            # rammed the repository face outside the docking aperture
            _collide(fsm, scene, err, axial_delta, env, events, tick)
            return events
        if (depth >= -cfg.approach_corridor_mm
                and err[0] < env.collision_trans_threshold
                and axial_delta > 0.0):
            fsm.max_depth = depth
            nxt = (ExchangePhase.FEEDING if phase is ExchangePhase.ALIGNING
                   else ExchangePhase.INSERTING)
            _enter(fsm, nxt, events, tick)
        return events

    if phase is ExchangePhase.FEEDING:
        if depth > fsm.max_depth:
            fsm.max_depth = depth
        if fsm.max_depth - depth > RETRACT_HYSTERESIS_MM:
            _fail(fsm, FailureMode.RETRACT_RETRY, events, tick,
                  retreat_mm=fsm.max_depth - depth)
            return events
        if depth >= 0.0 and not fsm.contact_seen:
            fsm.contact_seen = True
            events.append(TrialEvent(tick, "mech", {"outcome": "mouth_contact",
                                                    "trans_err": err[0],
                                                    "tilt_err": err[1]}))
        if depth >= 0.0:
            outcome = mechanism.try_engage_latch(err, env)
            if outcome is EngageOutcome.COLLISION:
                _collide(fsm, scene, err, axial_delta, env, events, tick)
                return events
            if outcome is EngageOutcome.ENGAGED and depth >= cfg.slot_depth_mm:
                ins_id = bay.occupied_by
                bay.occupied_by = None
                ins = scene.instrument(ins_id)
                ins.state = "carried"
                ins.base_pose = scene.arm_tip
                events.append(TrialEvent(tick, "mech", {"outcome": "engaged",
                                                        "instrument": ins_id}))
                _enter(fsm, ExchangePhase.LOCKED, events, tick)
                fsm.task_complete = True
        return events

    if phase is ExchangePhase.INSERTING:
        if depth > fsm.max_depth:
            fsm.max_depth = depth
        if fsm.max_depth - depth > RETRACT_HYSTERESIS_MM:
            _fail(fsm, FailureMode.RETRACT_RETRY, events, tick,
                  retreat_mm=fsm.max_depth - depth)
            return events
        if depth >= 0.0 and err[0] > env.collision_trans_threshold:
            _collide(fsm, scene, err, axial_delta, env, events, tick)
            return events
        if depth >= cfg.slot_depth_mm:
            triggered = mechanism.try_trigger_limit_switch(err, True, env)
            if not triggered:
                _fail(fsm, FailureMode.TILTED_INSERTION_NO_TRIGGER, events,
                      tick, reason="no_trigger",
                      trans_err=err[0], tilt_err=err[1])
            elif not mechanism.can_release(latch):
                # unlock failure: switch fired but the release actuator
                # cannot overcome the latch preload
                _fail(fsm, FailureMode.TILTED_INSERTION_NO_TRIGGER, events,
                      tick, reason="unlock_force_insufficient",
                      required=mechanism.release_threshold(latch),
                      available=latch.f_release)
            else:
                ins = scene.carried_instrument()
                ins.state = f"stowed:{bay.id}"
                ins.base_pose = bay.slot_pose
                bay.occupied_by = ins.id
                bay.limit_switch_pressed = True
                events.append(TrialEvent(tick, "mech", {
                    "outcome": "release_triggered",
                    "instrument": ins.id,
                    "withdraw_resistance_n": mechanism.withdraw_resistance(
                        iface, True, latch),
                }))
                _enter(fsm, ExchangePhase.RELEASE_TRIGGERED, events, tick)
        return events

    if phase is ExchangePhase.RELEASE_TRIGGERED:
        if axial_delta < 0.0:
            _enter(fsm, ExchangePhase.WITHDRAWING_EMPTY, events, tick)
        return events

    if phase is ExchangePhase.WITHDRAWING_EMPTY:
        if depth <= cfg.slot_depth_mm - cfg.withdraw_clearance_mm:
            bay.limit_switch_pressed = False
            _enter(fsm, ExchangePhase.DETACHED, events, tick)
            if fsm.task == "detach":
                fsm.task_complete = True
            else:
                # cycle: chain straight into the attach segment
                other = 1 - fsm.target_bay
                _begin_segment(fsm, scene, other)
                _enter(fsm, ExchangePhase.ALIGNING, events, tick)
        return events

    if phase is ExchangePhase.LOCKED:
        if axial_delta < 0.0:
            _enter(fsm, ExchangePhase.WITHDRAWING_CARRYING, events, tick)
        return events

    return events


def _collide(fsm: FsmState, scene: SceneState, err: tuple[float, float],
             axial_delta: float, env: ToleranceEnvelope,
             events: list[TrialEvent], tick: int) -> None:
    adjacent = scene.bays[1 - fsm.target_bay]
    effects = mechanism.collision_outcome(
        err, axial_delta, adjacent.occupied_by is not None, env)
    _fail(fsm, FailureMode.AXIAL_MISALIGNMENT_COLLISION, events, tick,
          trans_err=err[0], reaction_force_n=effects.reaction_force)
    if effects.base_slippage:
        scene.base_stable = False
        events.append(TrialEvent(tick, "failure", {
            "mode": FailureMode.BASE_SLIPPAGE.value,
            "reaction_force_n": effects.reaction_force,
        }))
    if effects.adjacent_ejection:
        ejected_id = adjacent.occupied_by
        adjacent.occupied_by = None
        scene.instrument(ejected_id).state = "ejected"
        events.append(TrialEvent(tick, "failure", {
            "mode": FailureMode.ADJACENT_EJECTION.value,
            "instrument": ejected_id,
        }))


def classify_failure(events: list[TrialEvent]) -> FailureMode | None:
    """First failure mode in event order, or None for a clean trial."""
    for ev in events:
        if ev.kind == "failure":
            return FailureMode(ev.payload["mode"])
    return None
