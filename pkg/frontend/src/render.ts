// Dual 2D viewport (top-down x/y and side elevation x/z) plus the HUD.
// Alignment is fully legible in the two orthogonal projections.

import { Pose, StateUpdate } from "./protocol.js";
import { TimerBoard } from "./timers.js";

const SLOT_DEPTH_MM = 20;
const TIMER_ORDER = [
  "t_move_return",
  "t_trigger_release",
  "t_withdraw",
  "t_unload",
  "t_align",
  "t_feed",
  "t_lock",
  "t_install",
  "t_exchange",
];

interface Projection {
  // world mm -> canvas px for one viewport
  px(x: number, lateral: number): [number, number];
  lateralOf(p: Pose): number;
  label: string;
}

export class SceneRenderer {
  private ctx: CanvasRenderingContext2D;
  private width: number;
  private height: number;

  constructor(canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    this.ctx = ctx;
    this.width = canvas.width;
    this.height = canvas.height;
  }

  draw(state: StateUpdate, timers: TimerBoard, banner: string | null): void {
    const ctx = this.ctx;
    ctx.fillStyle = "#10141a";
    ctx.fillRect(0, 0, this.width, this.height);

    const half = this.height / 2;
    this.drawViewport(state, 0, half, {
      px: (x, lat) => [
        this.width * 0.55 + x * 0.9,
        half / 2 - lat * 0.9,
      ],
      lateralOf: (p) => p.y,
      label: "top (x/y)",
    });
    this.drawViewport(state, half, half, {
      px: (x, lat) => [
        this.width * 0.55 + x * 0.9,
        half + half / 2 - (lat - 100) * 0.9,
      ],
      lateralOf: (p) => p.z,
      label: "side (x/z)",
    });
    this.drawHud(state, timers, banner);
  }

  private drawViewport(
    state: StateUpdate,
    top: number,
    height: number,
    proj: Projection,
  ): void {
    const ctx = this.ctx;
    ctx.save();
    ctx.beginPath();
    ctx.rect(0, top, this.width, height);
    ctx.clip();

    ctx.strokeStyle = "#2a3342";
    ctx.strokeRect(0.5, top + 0.5, this.width - 1, height - 1);
    ctx.fillStyle = "#5b6b80";
    ctx.font = "12px monospace";
    ctx.fillText(proj.label, 8, top + 16);

    for (const bay of state.bays) {
      const [bx, by] = proj.px(bay.slot_pose.x, proj.lateralOf(bay.slot_pose));
      ctx.strokeStyle = bay.occupied_by ? "#7a8aa0" : "#46566c";
      ctx.strokeRect(bx, by - 6, SLOT_DEPTH_MM * 0.9, 12);
      ctx.fillStyle = "#8aa0b8";
      ctx.fillText(`bay ${bay.id}`, bx + 22, by + 4);
      if (bay.occupied_by) {
        ctx.fillStyle = "#c9a227";
        ctx.fillRect(bx + 2, by - 4, SLOT_DEPTH_MM * 0.9 - 4, 8);
      }
    }

    const tip = state.arm_tip;
    const [tx, ty] = proj.px(tip.x, proj.lateralOf(tip));
    const angle =
      proj.lateralOf({ ...tip, y: 1, z: 0 }) === 1
        ? (tip.yaw * Math.PI) / 180
        : (-tip.pitch * Math.PI) / 180;
    ctx.strokeStyle = state.failure_mode ? "#e05555" : "#5ad17a";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(tx - 24 * Math.cos(angle), ty + 24 * Math.sin(angle));
    ctx.lineTo(tx, ty);
    ctx.stroke();
    ctx.lineWidth = 1;
    const carried = state.instruments.find((i) => i.state === "carried");
    if (carried) {
      ctx.fillStyle = "#c9a227";
      ctx.fillRect(tx - 2, ty - 4, 16, 8);
    }
    ctx.fillStyle = "#5ad17a";
    ctx.fillRect(tx - 2, ty - 2, 4, 4);
    ctx.restore();
  }

  private drawHud(
    state: StateUpdate,
    timers: TimerBoard,
    banner: string | null,
  ): void {
    const ctx = this.ctx;
    ctx.font = "13px monospace";
    ctx.fillStyle = "#d7e0ea";
    ctx.fillText(`phase: ${state.phase}`, 8, 36);
    ctx.fillText(`t: ${state.sim_time.toFixed(2)}s  seq: ${state.seq}`, 8, 52);

    let y = 76;
    const values = timers.values();
    for (const name of TIMER_ORDER) {
      const v = values.get(name);
      if (v === undefined) continue;
      ctx.fillStyle = "#9fb2c8";
      ctx.fillText(`${name}: ${v.toFixed(2)}s`, 8, y);
      y += 14;
    }

    if (!state.base_stable) {
      ctx.fillStyle = "#e0a030";
      ctx.fillText("BASE UNSTABLE", 8, y + 6);
      y += 20;
    }
    if (state.failure_mode) {
      ctx.fillStyle = "#e05555";
      ctx.font = "bold 15px monospace";
      ctx.fillText(`FAILED: ${state.failure_mode}`, 8, y + 10);
    } else if (banner) {
      ctx.fillStyle = "#e0a030";
      ctx.fillText(banner, 8, y + 10);
    }
  }
}
