// One control session over a WebSocket. Commands are gated behind the
// hello acknowledgment and carry a strictly increasing seq.

import {
  decodeFrame,
  encodeFrame,
  ErrorFrame,
  makeCommand,
  Pose,
  StateUpdate,
} from "./protocol.js";

/** The subset of the WebSocket API the session needs (swappable in tests). */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export interface SessionHandlers {
  onState?: (update: StateUpdate) => void;
  onError?: (err: ErrorFrame) => void;
  onReady?: () => void;
  onClose?: (reason: string) => void;
}

export class UiSession {
  readonly sessionId: string;
  readonly task: string;
  private socket: SocketLike;
  private handlers: SessionHandlers;
  private seq = 0;
  private ready = false;
  private closed = false;
  lastState: StateUpdate | null = null;

  constructor(
    socket: SocketLike,
    task: string,
    seed: number,
    handlers: SessionHandlers = {},
    sessionId?: string,
  ) {
    this.task = task;
    this.sessionId = sessionId ?? `ui-${Math.floor(Math.random() * 1e9)}`;
    this.socket = socket;
    this.handlers = handlers;

    socket.onopen = () => {
      socket.send(
        encodeFrame({
          type: "hello",
          session_id: this.sessionId,
          task,
          seed,
        }),
      );
    };
    socket.onmessage = (ev) => this.handleMessage(ev.data);
    socket.onclose = () => this.handleClose("connection closed");
    socket.onerror = () => this.handleClose("connection error");
  }

  get isReady(): boolean {
    return this.ready;
  }

  get isClosed(): boolean {
    return this.closed;
  }

  get nextSeq(): number {
    return this.seq + 1;
  }

  private handleMessage(data: unknown): void {
    if (typeof data !== "string") return;
    const msg = decodeFrame(data);
    if (msg === null) return; // malformed frame: keep the last good state
    switch (msg.type) {
      case "hello":
        if (msg.ok) {
          this.ready = true;
          this.handlers.onReady?.();
        }
        break;
      case "state":
        this.lastState = msg;
        this.handlers.onState?.(msg);
        break;
      case "err":
        this.handlers.onError?.(msg);
        break;
    }
  }

  private handleClose(reason: string): void {
    if (this.closed) return;
    this.closed = true;
    this.ready = false;
    this.handlers.onClose?.(reason);
  }

  /**
   * Send one pose command. Returns the seq used, or null when the
   * session is not ready (never before the hello ack, never after close).
   */
  sendCommand(delta: Pose, axialFeed: number, clientTimeMs: number): number | null {
    if (!this.ready || this.closed) return null;
    this.seq += 1;
    this.socket.send(
      encodeFrame(
        makeCommand(this.seq, this.sessionId, delta, axialFeed, clientTimeMs),
      ),
    );
    return this.seq;
  }

  close(): void {
    this.socket.close();
    this.handleClose("closed by client");
  }
}

export function defaultEndpoint(host: string, port: number): string {
  return `ws://${host}:${port}/session`;
}

export function connect(
  endpoint: string,
  task: string,
  seed: number,
  handlers: SessionHandlers,
): UiSession {
  return new UiSession(new WebSocket(endpoint) as SocketLike, task, seed, handlers);
}
