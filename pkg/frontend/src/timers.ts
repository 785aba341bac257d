// HUD phase timers derived from the event stream. The server is
// authoritative; this mirrors its span definitions so the displayed
// values match the recorded ones at tick resolution.

import { StateUpdate, TrialEvent } from "./protocol.js";

// (timer, span start mark, span end mark); marks are phase names plus
// the synthetic "mouth_contact" mechanism event
const SPANS: ReadonlyArray<[string, string, string]> = [
  ["t_move_return", "returning", "inserting"],
  ["t_trigger_release", "inserting", "release_triggered"],
  ["t_withdraw", "release_triggered", "detached"],
  ["t_align", "aligning", "feeding"],
  ["t_feed", "feeding", "mouth_contact"],
  ["t_lock", "mouth_contact", "locked"],
];

const AGGREGATES: ReadonlyArray<[string, string[]]> = [
  ["t_unload", ["t_move_return", "t_trigger_release", "t_withdraw"]],
  ["t_install", ["t_align", "t_feed", "t_lock"]],
  ["t_exchange", ["t_unload", "t_install"]],
];

export class TimerBoard {
  readonly dt: number;
  private marks = new Map<string, number>();
  private lastTick = 0;

  constructor(dt = 0.01) {
    this.dt = dt;
  }

  observe(update: StateUpdate): void {
    this.lastTick = Math.round(update.sim_time / this.dt);
    for (const ev of update.events_since_last) {
      this.observeEvent(ev);
    }
  }

  observeEvent(ev: TrialEvent): void {
    if (ev.kind === "phase") {
      const phase = ev.payload["phase"];
      if (typeof phase === "string" && !this.marks.has(phase)) {
        this.marks.set(phase, ev.tick);
      }
    } else if (ev.kind === "mech" && ev.payload["outcome"] === "mouth_contact") {
      if (!this.marks.has("mouth_contact")) {
        this.marks.set("mouth_contact", ev.tick);
      }
    }
  }

  /**
   * Timer values in seconds. Completed spans are frozen; the span whose
   * start mark exists but whose end does not runs live against the
   * latest tick.
   */
  values(): Map<string, number> {
    const ticks = new Map<string, number>();
    for (const [name, start, end] of SPANS) {
      const s = this.marks.get(start);
      if (s === undefined) continue;
      const e = this.marks.get(end);
      ticks.set(name, (e !== undefined ? e : this.lastTick) - s);
    }
    for (const [name, parts] of AGGREGATES) {
      if (parts.every((p) => ticks.has(p))) {
        ticks.set(name, parts.reduce((acc, p) => acc + ticks.get(p)!, 0));
      }
    }
    const out = new Map<string, number>();
    for (const [name, t] of ticks) out.set(name, t * this.dt);
    return out;
  }

  reset(): void {
    this.marks.clear();
    this.lastTick = 0;
  }
}
