/**
 * Telemetry subscription: WebSocket in, state mutations out.
 *
 * Strictly observe-only: the dashboard never writes to this socket
 * (gesture commands must come from the signal path, not the UI).
 */

import { applyMessage, type SessionState } from "./state.js";
import type { TelemetryMessage } from "./types.js";

export interface WebSocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  close(): void;
}

export interface TelemetryClientOptions {
  makeSocket: (url: string) => WebSocketLike;
  now: () => number;
  onChange?: () => void;
  reconnectDelayMs?: number;
  /** injected timer so tests can drive reconnection deterministically */
  schedule?: (fn: () => void, ms: number) => void;
}

export class TelemetryClient {
  private socket: WebSocketLike | null = null;
  private stopped = false;

  constructor(
    private url: string,
    private state: SessionState,
    private opts: TelemetryClientOptions,
  ) {}

  start(): void {
    this.stopped = false;
    this.connect();
  }

  private connect(): void {
    const socket = this.opts.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.state.connected = true;
      this.opts.onChange?.();
    };
    socket.onmessage = (ev) => {
      let msg: TelemetryMessage;
      try {
        msg = JSON.parse(ev.data) as TelemetryMessage;
      } catch {
        return; // tolerate malformed lines; the stream continues
      }
      applyMessage(this.state, msg, this.opts.now());
      this.opts.onChange?.();
    };
    socket.onclose = () => {
      // surface the disconnect immediately; reconnect in the background
      this.state.connected = false;
      this.opts.onChange?.();
      if (!this.stopped) {
        const delay = this.opts.reconnectDelayMs ?? 1000;
        (this.opts.schedule ?? setTimeout)(() => {
          if (!this.stopped) this.connect();
        }, delay);
      }
    };
    socket.onerror = () => socket.close();
  }

  stop(): void {
    this.stopped = true;
    this.socket?.close();
  }
}
