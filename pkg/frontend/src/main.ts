// Entry point: wire the WebSocket session, keyboard input, and canvas
// rendering together. Query parameters: ?host=, ?port=, ?task=, ?seed=.

import { KeyTracker } from "./input.js";
import { SceneRenderer } from "./render.js";
import { connect, defaultEndpoint, UiSession } from "./session.js";
import { TimerBoard } from "./timers.js";

const TICK_MS = 10; // server tick; command rate is throttled to it

function param(name: string, fallback: string): string {
  return new URLSearchParams(window.location.search).get(name) ?? fallback;
}

function main(): void {
  const canvas = document.getElementById("scene") as HTMLCanvasElement;
  const renderer = new SceneRenderer(canvas);
  const keys = new KeyTracker();
  const timers = new TimerBoard();
  let banner: string | null = "connecting...";
  let lastCommandAt = 0;

  const host = param("host", window.location.hostname || "127.0.0.1");
  const port = Number(param("port", "7432"));
  const task = param("task", "cycle");
  const seed = Number(param("seed", "0"));

  const session: UiSession = connect(defaultEndpoint(host, port), task, seed, {
    onReady: () => {
      banner = null;
    },
    onState: (update) => timers.observe(update),
    onError: (err) => {
      banner = `server error [${err.code}]: ${err.message}`;
    },
    onClose: (reason) => {
      banner = `${reason}; reload for a fresh trial`;
      keys.clear();
    },
  });

  window.addEventListener("keydown", (ev) => {
    keys.down(ev.code);
    if (ev.code.startsWith("Arrow")) ev.preventDefault();
  });
  window.addEventListener("keyup", (ev) => keys.up(ev.code));
  window.addEventListener("blur", () => keys.clear());

  const frame = (now: number): void => {
    // at most one command per server tick, even at higher refresh rates
    if (session.isReady && now - lastCommandAt >= TICK_MS) {
      const sample = keys.sample();
      session.sendCommand(sample.delta, sample.axialFeed, now);
      lastCommandAt = now;
    }
    if (session.lastState) {
      renderer.draw(session.lastState, timers, banner);
    }
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

main();
