// Pose uplink. Pointer updates land in `setTarget` at whatever rate the
// platform delivers them; a ticker forwards at most one pose per interval,
// always the newest (older ones are stale by definition). Server acks are
// handed back to the caller, error frames keep the socket, a dropped
// connection reconnects with exponential backoff and re-announces the
// current target.

import { parseServiceJson, PoseAck, Vec3 } from "./protocol";

export interface SocketLike {
  readyState: number;
  send(data: string): void;
  close(code?: number): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

const SOCKET_OPEN = 1;

export interface PoseChannelOptions {
  intervalMs?: number;
  backoffMs?: number;
  backoffMaxMs?: number;
  now?: () => number;
  onAck?: (ack: PoseAck) => void;
  onServiceError?: (message: string) => void;
  onOpen?: () => void;
  onDown?: (reason: string) => void;
}

export class PoseChannel {
  sends = 0;

  private socket: SocketLike | null = null;
  private target: Vec3 | null = null;
  private lastSent: Vec3 | null = null;
  private ticker: ReturnType<typeof setInterval> | null = null;
  private retry: ReturnType<typeof setTimeout> | null = null;
  private attempts = 0;
  private closed = false;

  constructor(
    private url: string,
    private makeSocket: SocketFactory,
    private opts: PoseChannelOptions = {},
  ) {}

  start(): void {
    this.closed = false;
    this.connect();
  }

  stop(): void {
    this.closed = true;
    if (this.ticker !== null) clearInterval(this.ticker);
    this.ticker = null;
    if (this.retry !== null) clearTimeout(this.retry);
    this.retry = null;
    const ws = this.socket;
    this.socket = null;
    if (ws) {
      ws.onclose = null;
      ws.close();
    }
  }

  // remember the newest requested pose; the ticker does the sending
  setTarget(pose: Vec3): void {
    this.target = pose;
    if (this.ticker === null && !this.closed) {
      this.flush();
      this.ticker = setInterval(() => this.flush(), this.opts.intervalMs ?? 16);
    }
  }

  private connect(): void {
    const ws = this.makeSocket(this.url);
    this.socket = ws;
    ws.onopen = () => {
      this.attempts = 0;
      // fresh socket, fresh server view: re-announce where we are
      this.lastSent = null;
      this.opts.onOpen?.();
    };
    ws.onmessage = (ev) => {
      const text = typeof ev.data === "string" ? ev.data : String(ev.data);
      this.receive(text);
    };
    ws.onclose = () => this.scheduleReconnect("connection lost, retrying...");
    ws.onerror = () => {
      // the close event follows and owns the reconnect
    };
  }

  private scheduleReconnect(reason: string): void {
    if (this.closed) return;
    this.socket = null;
    this.opts.onDown?.(reason);
    const base = this.opts.backoffMs ?? 250;
    const cap = this.opts.backoffMaxMs ?? 4000;
    const wait = Math.min(base * 2 ** this.attempts, cap);
    this.attempts += 1;
    this.retry = setTimeout(() => this.connect(), wait);
  }

  private receive(text: string): void {
    let msg: any;
    try {
      msg = parseServiceJson(text);
    } catch {
      return;
    }
    if (msg && typeof msg.error === "string") {
      // error frames are advisory; the connection stays up
      this.opts.onServiceError?.(msg.error);
      return;
    }
    this.opts.onAck?.(msg as PoseAck);
  }

  private flush(): void {
    const ws = this.socket;
    const t = this.target;
    if (!ws || ws.readyState !== SOCKET_OPEN || t === null) return;
    const s = this.lastSent;
    // same instance covers non-finite targets, where === on elements lies
    if (s && (s === t || (s[0] === t[0] && s[1] === t[1] && s[2] === t[2]))) return;
    const now = this.opts.now ?? Date.now;
    ws.send(JSON.stringify({ t: now() / 1000, x: t[0], y: t[1], z: t[2] }));
    this.lastSent = t;
    this.sends += 1;
  }
}
