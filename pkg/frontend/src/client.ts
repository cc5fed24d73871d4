/** WebSocket client with ack-gated commands and latest-frame delivery.
 *
 * The UI never mutates mission state locally: every command waits for the
 * server's ack (or error) before the caller updates any control state.
 * Telemetry is collapsed to the newest frame; consumers pull it once per
 * animation tick, so a slow renderer never queues stale frames.
 */

import { Command, ServerMessage, TelemetryFrame } from "./types.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((event: { data: string }) => void) | null;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: ((event: unknown) => void) | null;
}

export type ConnectionState = "connecting" | "open" | "closed";

interface PendingCommand {
  resolve: (msg: ServerMessage) => void;
  reject: (err: Error) => void;
  timer: ReturnType<typeof setTimeout>;
}

export class MissionClient {
  private socket: SocketLike;
  private pending: PendingCommand[] = [];
  private latest: TelemetryFrame | null = null;
  private rendered = true;
  state: ConnectionState = "connecting";
  onstate: ((state: ConnectionState) => void) | null = null;
  commandTimeoutMs = 3000;

  constructor(socket: SocketLike) {
    this.socket = socket;
    socket.onopen = () => {
      this.state = "open";
      this.onstate?.(this.state);
    };
    socket.onclose = () => {
      this.state = "closed";
      this.onstate?.(this.state);
      this.failPending(new Error("connection closed"));
    };
    socket.onerror = () => {
      this.state = "closed";
      this.onstate?.(this.state);
      this.failPending(new Error("connection error"));
    };
    socket.onmessage = (event) => this.handleMessage(event.data);
  }

  private failPending(err: Error): void {
    for (const p of this.pending.splice(0)) {
      clearTimeout(p.timer);
      p.reject(err);
    }
  }

  private handleMessage(data: string): void {
    let msg: ServerMessage;
    try {
      msg = JSON.parse(data) as ServerMessage;
    } catch {
      return; // malformed frames are dropped, last good state retained
    }
    if (msg.type === "telemetry") {
      this.latest = msg;
      this.rendered = false;
      return;
    }
    const pending = this.pending.shift();
    if (pending) {
      clearTimeout(pending.timer);
      pending.resolve(msg);
    }
  }

  /** Newest unrendered frame, or null; marks it consumed. */
  takeFrame(): TelemetryFrame | null {
    if (this.rendered) {
      return null;
    }
    this.rendered = true;
    return this.latest;
  }

  lastFrame(): TelemetryFrame | null {
    return this.latest;
  }

  /** Send one command; resolves with the ack, rejects on error/timeout. */
  send(command: Command): Promise<ServerMessage> {
    return new Promise((resolve, reject) => {
      const timer = setTimeout(() => {
        const idx = this.pending.findIndex((p) => p.timer === timer);
        if (idx >= 0) {
          this.pending.splice(idx, 1);
        }
        reject(new Error("command timed out"));
      }, this.commandTimeoutMs);
      this.pending.push({ resolve, reject, timer });
      this.socket.send(JSON.stringify(command));
    });
  }

  close(): void {
    this.socket.close();
  }
}
