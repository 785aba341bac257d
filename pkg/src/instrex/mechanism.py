"""Latch/release force gating, docking geometry tolerances and the
collision failure model.

All operations are pure functions over value types. Forces are newtons,
lengths mm, angles degrees.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass


@dataclass(frozen=True)
class LatchParams:
    """Constants of the latch unlock condition."""

    f_lock_preload: float = 10.0
    c_fric: float = 0.2
    f_normal: float = 5.0
    f_release: float = 15.0

    def __post_init__(self):
        for name in ("f_lock_preload", "c_fric", "f_normal", "f_release"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.c_fric >= 2:
            raise ValueError("c_fric out of sane range (< 2)")


@dataclass(frozen=True)
class InterfaceParams:
    """Constants of the post-unlock withdrawal resistance."""

    f_residual: float = 1.0
    mu_interface: float = 0.1
    n_interface: float = 10.0

    def __post_init__(self):
        for name in ("f_residual", "mu_interface", "n_interface"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.mu_interface >= 2:
            raise ValueError("mu_interface out of sane range (< 2)")


@dataclass(frozen=True)
class ToleranceEnvelope:
    """Geometric gates of the docking interface.

    Values are config defaults, not measured quantities; they are sized so
    that novice-level alignment noise produces occasional failures.
    """

    engage_trans_tol: float = 3.0
    engage_tilt_tol: float = 5.0
    trigger_tilt_tol: float = 5.0
    collision_trans_threshold: float = 8.0
    eject_trans_threshold: float = 12.0
    slip_force_threshold: float = 40.0
    k_contact: float = 10.0  # N per mm/tick of feed speed

    def __post_init__(self):
        if not (0 < self.engage_trans_tol < self.collision_trans_threshold
                < self.eject_trans_threshold):
            raise ValueError(
                "tolerance ordering violated: need 0 < engage_trans_tol < "
                "collision_trans_threshold < eject_trans_threshold"
            )


class EngageOutcome(enum.Enum):
    ENGAGED = "engaged"
    NO_ENGAGE = "no_engage"
    COLLISION = "collision"


@dataclass(frozen=True)
class CollisionEffects:
    reaction_force: float
    base_slippage: bool
    adjacent_ejection: bool


def release_threshold(p: LatchParams) -> float:
    """Minimum unlock force: latch preload plus friction at the latch face."""
    return p.f_lock_preload + p.c_fric * p.f_normal


def can_release(p: LatchParams) -> bool:
    """Whether the release actuator can overcome the latch (inclusive)."""
    return p.f_release >= release_threshold(p)


def withdraw_resistance(i: InterfaceParams, unlocked: bool,
                        p: LatchParams) -> float:
    """Axial force opposing separation of the two interface halves.

    Once unlocked only residual contact and sliding friction remain; while
    locked the latch preload still impedes axial movement.
    """
    base = i.f_residual + i.mu_interface * i.n_interface
    if unlocked:
        return base
    return base + p.f_lock_preload


def try_engage_latch(err: tuple[float, float],
                     env: ToleranceEnvelope) -> EngageOutcome:
    """Outcome of an axial feed reaching the engagement depth."""
    trans_err, tilt_err = err
    if trans_err > env.collision_trans_threshold:
        return EngageOutcome.COLLISION
    if trans_err <= env.engage_trans_tol and tilt_err <= env.engage_tilt_tol:
        return EngageOutcome.ENGAGED
    return EngageOutcome.NO_ENGAGE


def try_trigger_limit_switch(err: tuple[float, float], depth_reached: bool,
                             env: ToleranceEnvelope) -> bool:
    """Whether the bottom-of-slot switch fires for an inserted instrument.

    A tilted or laterally offset insertion holds the instrument base off
    the switch even at full depth.
    """
    if not depth_reached:
        return False
    trans_err, tilt_err = err
    return tilt_err <= env.trigger_tilt_tol and trans_err <= env.engage_trans_tol


def collision_outcome(err: tuple[float, float], feed_speed: float,
                      adjacent_occupied: bool, env: ToleranceEnvelope,
                      rng: random.Random | None = None) -> CollisionEffects:
    """Secondary effects of a rigid docking collision.

    Reaction force is modeled linear in feed speed. The rng parameter is
    reserved for stochastic effect models; the default effects are fully
    deterministic and ignore it.
    """
    trans_err, _ = err
    reaction = env.k_contact * feed_speed
    return CollisionEffects(
        reaction_force=reaction,
        base_slippage=reaction > env.slip_force_threshold,
        adjacent_ejection=(trans_err > env.eject_trans_threshold
                           and adjacent_occupied),
    )
