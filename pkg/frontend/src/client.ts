// Socket plumbing: connect, handshake, forward frames to the reducer loop.
// The WebSocket implementation is injected so tests can drive a real server
// with the `ws` package while the browser uses its native class.

import type { CommandBody, CommandFrame, JoinFrame, ViewInput } from "./protocol.js";
import { isServerFrame } from "./protocol.js";

// Handler params are `any` on purpose: the browser WebSocket and the `ws`
// package disagree on event types, and this interface must admit both.
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev: any) => void) | null;
  onmessage: ((ev: any) => void) | null;
  onclose: ((ev: any) => void) | null;
  onerror: ((ev: any) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface BoardClientOptions {
  serverAddress: string; // host:port
  seat: number;
  token?: string;
  makeSocket: SocketFactory;
  dispatch: (input: ViewInput) => void;
  retryDelayMs?: number;
  maxRetries?: number;
}

export class BoardClient {
  private socket: SocketLike | null = null;
  private readonly opts: BoardClientOptions;
  private token: string | undefined;
  private retries = 0;
  private closedByUs = false;
  private joined = false;
  private snapshotSeen = false;

  constructor(opts: BoardClientOptions) {
    this.opts = opts;
    this.token = opts.token;
  }

  connect(): void {
    this.opts.dispatch({ kind: "local_status", status: "connecting" });
    this.open();
  }

  private open(): void {
    const url = `ws://${this.opts.serverAddress}/ws`;
    const socket = this.opts.makeSocket(url);
    this.socket = socket;
    this.joined = false;

    socket.onopen = () => {
      this.retries = 0;
    };
    socket.onmessage = (ev) => {
      this.handleMessage(String(ev.data));
    };
    socket.onerror = () => {
      // onclose follows; retry logic lives there
    };
    socket.onclose = () => {
      this.socket = null;
      if (this.closedByUs) return;
      const limit = this.opts.maxRetries ?? 30;
      if (this.retries >= limit) return;
      this.retries += 1;
      this.opts.dispatch({
        kind: "local_status",
        status: "retry",
        detail: `reconnecting (attempt ${this.retries})`,
      });
      const delay = this.opts.retryDelayMs ?? 1500;
      setTimeout(() => {
        if (!this.closedByUs) this.open();
      }, delay);
    };
  }

  private handleMessage(raw: string): void {
    let frame: unknown;
    try {
      frame = JSON.parse(raw);
    } catch {
      console.warn("unparseable frame", raw);
      return;
    }
    if (!isServerFrame(frame)) {
      console.warn("unknown frame", frame);
      return;
    }
    if (frame.kind === "hello" && !this.joined) {
      const join: JoinFrame = { kind: "join", body: { seat: this.opts.seat } };
      if (this.token) join.body.token = this.token;
      this.socket?.send(JSON.stringify(join));
      this.joined = true;
    }
    if (frame.kind === "state_snapshot") {
      this.snapshotSeen = true;
      if (frame.body.seatToken) this.token = frame.body.seatToken;
      this.opts.dispatch({ kind: "local_status", status: "open" });
    }
    if (frame.kind === "error" && !this.snapshotSeen && frame.body.error === "NotYourSeat") {
      // the join itself was refused; this seat cannot be had
      this.opts.dispatch({
        kind: "local_status",
        status: "seat_unavailable",
        detail: frame.body.message,
      });
    }
    this.opts.dispatch(frame);
  }

  submit(body: CommandBody): void {
    if (!this.socket) return;
    const frame: CommandFrame = { kind: "command", seat: this.opts.seat, body };
    this.socket.send(JSON.stringify(frame));
  }

  close(): void {
    this.closedByUs = true;
    this.socket?.close();
    this.socket = null;
  }
}
