import { describe, expect, it } from "vitest";
import { StateUpdate, TrialEvent } from "../src/protocol.js";
import { TimerBoard } from "../src/timers.js";

function phaseEvent(tick: number, phase: string): TrialEvent {
  return { tick, kind: "phase", payload: { phase } };
}

function mouthContact(tick: number): TrialEvent {
  return { tick, kind: "mech", payload: { outcome: "mouth_contact" } };
}

function update(tick: number, events: TrialEvent[]): StateUpdate {
  return {
    type: "state",
    seq: tick,
    sim_time: tick * 0.01,
    arm_tip: { x: 0, y: 0, z: 0, pitch: 0, yaw: 0, roll: 0 },
    phase: "aligning",
    failure_mode: null,
    bays: [],
    instruments: [],
    events_since_last: events,
    base_stable: true,
  };
}

describe("TimerBoard", () => {
  it("derives attach spans from phase marks", () => {
    const board = new TimerBoard();
    board.observe(update(10, [phaseEvent(10, "aligning")]));
    board.observe(update(250, [phaseEvent(250, "feeding")]));
    board.observe(update(310, [mouthContact(310)]));
    board.observe(update(340, [phaseEvent(340, "locked")]));
    const v = board.values();
    expect(v.get("t_align")).toBeCloseTo(2.4, 10);
    expect(v.get("t_feed")).toBeCloseTo(0.6, 10);
    expect(v.get("t_lock")).toBeCloseTo(0.3, 10);
    expect(v.get("t_install")).toBeCloseTo(3.3, 10);
  });

  it("derives detach spans and the unload aggregate", () => {
    const board = new TimerBoard();
    board.observe(update(0, [phaseEvent(0, "returning")]));
    board.observe(update(120, [phaseEvent(120, "inserting")]));
    board.observe(update(150, [phaseEvent(150, "release_triggered")]));
    board.observe(update(200, [phaseEvent(200, "detached")]));
    const v = board.values();
    expect(v.get("t_move_return")).toBeCloseTo(1.2, 10);
    expect(v.get("t_trigger_release")).toBeCloseTo(0.3, 10);
    expect(v.get("t_withdraw")).toBeCloseTo(0.5, 10);
    expect(v.get("t_unload")).toBeCloseTo(2.0, 10);
    expect(v.has("t_install")).toBe(false);
    expect(v.has("t_exchange")).toBe(false);
  });

  it("sums the full exchange when both halves complete", () => {
    const board = new TimerBoard();
    board.observe(update(0, [phaseEvent(0, "returning")]));
    board.observe(update(100, [phaseEvent(100, "inserting")]));
    board.observe(update(130, [phaseEvent(130, "release_triggered")]));
    board.observe(
      update(180, [phaseEvent(180, "detached"), phaseEvent(180, "aligning")]),
    );
    board.observe(update(300, [phaseEvent(300, "feeding")]));
    board.observe(update(350, [mouthContact(350)]));
    board.observe(update(380, [phaseEvent(380, "locked")]));
    const v = board.values();
    expect(v.get("t_exchange")).toBeCloseTo(3.8, 10);
    expect(v.get("t_exchange")).toBeCloseTo(
      v.get("t_unload")! + v.get("t_install")!,
      10,
    );
  });

  it("runs an open span live against the latest tick", () => {
    const board = new TimerBoard();
    board.observe(update(20, [phaseEvent(20, "aligning")]));
    board.observe(update(80, []));
    expect(board.values().get("t_align")).toBeCloseTo(0.6, 10);
    board.observe(update(90, []));
    expect(board.values().get("t_align")).toBeCloseTo(0.7, 10);
  });

  it("keeps only the first mark for a repeated phase", () => {
    const board = new TimerBoard();
    board.observe(update(10, [phaseEvent(10, "feeding")]));
    board.observe(update(50, [phaseEvent(50, "feeding")]));
    board.observe(update(70, [mouthContact(70)]));
    expect(board.values().get("t_feed")).toBeCloseTo(0.6, 10);
  });

  it("reset clears every mark", () => {
    const board = new TimerBoard();
    board.observe(update(10, [phaseEvent(10, "aligning")]));
    board.reset();
    expect(board.values().size).toBe(0);
  });
});
