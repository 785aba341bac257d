// Wire types mirroring docs/protocol.md. One JSON object per WebSocket
// text message; unknown fields are ignored on read.

export interface Pose {
  x: number;
  y: number;
  z: number;
  pitch: number;
  yaw: number;
  roll: number;
}

export const ZERO_POSE: Pose = { x: 0, y: 0, z: 0, pitch: 0, yaw: 0, roll: 0 };

export interface Hello {
  type: "hello";
  session_id: string;
  task: string;
  seed: number;
  ok?: boolean;
}

export interface PoseCommand {
  type: "cmd";
  seq: number;
  session_id: string;
  client_time_ms: number;
  delta: Pose;
  axial_feed: number;
}

export interface BaySnapshot {
  id: number;
  slot_pose: Pose;
  occupied_by: string | null;
  limit_switch_pressed: boolean;
}

export interface InstrumentSnapshot {
  id: string;
  base_pose: Pose;
  state: string;
}

export interface TrialEvent {
  tick: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface StateUpdate {
  type: "state";
  seq: number;
  sim_time: number;
  arm_tip: Pose;
  phase: string;
  failure_mode: string | null;
  bays: BaySnapshot[];
  instruments: InstrumentSnapshot[];
  events_since_last: TrialEvent[];
  base_stable: boolean;
}

export interface ErrorFrame {
  type: "err";
  code: string;
  message: string;
}

export type Message = Hello | PoseCommand | StateUpdate | ErrorFrame;

export function encodeFrame(msg: Message): string {
  return JSON.stringify(msg);
}

/** Parse one frame; returns null for malformed or unknown payloads. */
export function decodeFrame(text: string): Message | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const d = raw as Record<string, unknown>;
  switch (d.type) {
    case "hello":
      if (typeof d.session_id !== "string") return null;
      return {
        type: "hello",
        session_id: d.session_id,
        task: typeof d.task === "string" ? d.task : "cycle",
        seed: typeof d.seed === "number" ? d.seed : 0,
        ok: typeof d.ok === "boolean" ? d.ok : undefined,
      };
    case "state":
      if (typeof d.seq !== "number" || typeof d.sim_time !== "number") {
        return null;
      }
      if (!isPose(d.arm_tip) || typeof d.phase !== "string") return null;
      return {
        type: "state",
        seq: d.seq,
        sim_time: d.sim_time,
        arm_tip: d.arm_tip,
        phase: d.phase,
        failure_mode: typeof d.failure_mode === "string" ? d.failure_mode : null,
        bays: Array.isArray(d.bays) ? (d.bays as BaySnapshot[]) : [],
        instruments: Array.isArray(d.instruments)
          ? (d.instruments as InstrumentSnapshot[])
          : [],
        events_since_last: Array.isArray(d.events_since_last)
          ? (d.events_since_last as TrialEvent[])
          : [],
        base_stable: d.base_stable !== false,
      };
    case "err":
      if (typeof d.code !== "string" || typeof d.message !== "string") {
        return null;
      }
      return { type: "err", code: d.code, message: d.message };
    case "cmd":
      // the server never sends commands back; treat as unknown
      return null;
    default:
      return null;
  }
}

function isPose(v: unknown): v is Pose {
  if (typeof v !== "object" || v === null) return false;
  const p = v as Record<string, unknown>;
  return ["x", "y", "z", "pitch", "yaw", "roll"].every(
    (k) => typeof p[k] === "number" && Number.isFinite(p[k] as number),
  );
}

export function makeCommand(
  seq: number,
  sessionId: string,
  delta: Pose,
  axialFeed: number,
  clientTimeMs: number,
): PoseCommand {
  return {
    type: "cmd",
    seq,
    session_id: sessionId,
    client_time_ms: clientTimeMs,
    delta,
    axial_feed: axialFeed,
  };
}
