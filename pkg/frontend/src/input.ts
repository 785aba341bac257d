// Keyboard to pose-delta mapping. Held keys become per-tick deltas; the
// magnitudes stay below the server's clamps (5 mm, 2 deg per tick) so
// commands are applied exactly as sent.

import { Pose } from "./protocol.js";

export interface InputSample {
  delta: Pose;
  axialFeed: number;
}

export const TRANSLATE_MM_PER_TICK = 2.0;
export const ROTATE_DEG_PER_TICK = 1.0;
export const FEED_MM_PER_TICK = 2.5;

// Default bindings (keyboard event `code` values):
//   W / S        axial feed forward / back (along the target bay axis)
//   A / D        translate -x / +x
//   Arrow keys   translate y (left/right) and z (up/down)
//   I / K        pitch down / up
//   J / L        yaw left / right
//   U / O        roll
export function sampleInput(held: ReadonlySet<string>): InputSample {
  const axis = (neg: string, pos: string): number =>
    (held.has(pos) ? 1 : 0) - (held.has(neg) ? 1 : 0);

  const t = TRANSLATE_MM_PER_TICK;
  const r = ROTATE_DEG_PER_TICK;
  return {
    delta: {
      x: axis("KeyA", "KeyD") * t,
      y: axis("ArrowLeft", "ArrowRight") * t,
      z: axis("ArrowDown", "ArrowUp") * t,
      pitch: axis("KeyK", "KeyI") * r,
      yaw: axis("KeyJ", "KeyL") * r,
      roll: axis("KeyU", "KeyO") * r,
    },
    axialFeed: axis("KeyS", "KeyW") * FEED_MM_PER_TICK,
  };
}

export function isIdle(sample: InputSample): boolean {
  const d = sample.delta;
  return (
    sample.axialFeed === 0 &&
    d.x === 0 &&
    d.y === 0 &&
    d.z === 0 &&
    d.pitch === 0 &&
    d.yaw === 0 &&
    d.roll === 0
  );
}

/** Tracks which keys are currently held, from keydown/keyup events. */
export class KeyTracker {
  private held = new Set<string>();

  down(code: string): void {
    this.held.add(code);
  }

  up(code: string): void {
    this.held.delete(code);
  }

  clear(): void {
    this.held.clear();
  }

  sample(): InputSample {
    return sampleInput(this.held);
  }
}
