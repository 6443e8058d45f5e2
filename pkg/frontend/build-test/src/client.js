/**
 * Telemetry subscription: WebSocket in, state mutations out.
 *
 * Strictly observe-only: the dashboard never writes to this socket
 * (gesture commands must come from the signal path, not the UI).
 */
import { applyMessage } from "./state.js";
export class TelemetryClient {
    url;
    state;
    opts;
    socket = null;
    stopped = false;
    constructor(url, state, opts) {
        this.url = url;
        this.state = state;
        this.opts = opts;
    }
    start() {
        this.stopped = false;
        this.connect();
    }
    connect() {
        const socket = this.opts.makeSocket(this.url);
        this.socket = socket;
        socket.onopen = () => {
            this.state.connected = true;
            this.opts.onChange?.();
        };
        socket.onmessage = (ev) => {
            let msg;
            try {
                msg = JSON.parse(ev.data);
            }
            catch {
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
                    if (!this.stopped)
                        this.connect();
                }, delay);
            }
        };
        socket.onerror = () => socket.close();
    }
    stop() {
        this.stopped = true;
        this.socket?.close();
    }
}
