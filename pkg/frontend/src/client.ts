/**
 * The console's connection to the duet service.
 *
 * Owns one websocket, the clock estimate, the note queue, and the
 * console snapshot. Every inbound frame and every local tap funnels
 * through here and ends in a render callback with the new snapshot.
 * Sockets and timers are injected so tests can run a loopback server
 * with no network and no real clock.
 */

import { ServerClock } from "./clock.js";
import {
  applyDisconnect,
  applyServer,
  applyTapFlash,
  countMutedNote,
  countStaleNote,
  initialState,
  type ConsoleState,
} from "./console.js";
import { KEYBOARD_VELOCITY } from "./input.js";
import {
  helloMessage,
  hitMessage,
  parseServerMessage,
  serializeClientMessage,
  ProtocolError,
  type Player,
  type ServerMessage,
} from "./protocol.js";
import type { NoteScheduler } from "./scheduler.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientOptions {
  url: string;
  socketFactory: SocketFactory;
  scheduler: NoteScheduler;
  now: () => number;
  onRender: (state: ConsoleState) => void;
  player?: Player;
  onLocalTap?: (player: Player, velocity: number) => void;
  reconnectDelayMs?: number;
  scheduleRetry?: (fn: () => void, delayMs: number) => void;
}

export class DuetClient {
  private readonly opts: ClientOptions;
  private readonly scheduler: NoteScheduler;
  readonly clock = new ServerClock();
  private socket: SocketLike | null = null;
  private helloSentAtMs: number | null = null;
  private closedByUs = false;
  private stateSnapshot: ConsoleState = initialState();

  constructor(opts: ClientOptions) {
    this.opts = opts;
    this.scheduler = opts.scheduler;
  }

  get state(): ConsoleState {
    return this.stateSnapshot;
  }

  connect(): void {
    this.closedByUs = false;
    const socket = this.opts.socketFactory(this.opts.url);
    this.socket = socket;
    socket.onopen = () => {
      this.helloSentAtMs = this.opts.now();
      socket.send(serializeClientMessage(helloMessage(this.opts.player)));
    };
    socket.onmessage = (event) => {
      if (typeof event.data === "string") this.handleFrame(event.data);
    };
    socket.onclose = () => this.handleClose();
    socket.onerror = () => {
      /* the close handler owns recovery */
    };
    this.render();
  }

  /**
   * Send one tap. Returns false when not joined: a disconnected console
   * shows its reconnect state and drops taps rather than queueing them.
   */
  tap(player: Player, velocity: number = KEYBOARD_VELOCITY): boolean {
    if (this.stateSnapshot.status !== "joined" || this.socket === null) return false;
    const now = this.opts.now();
    this.socket.send(serializeClientMessage(hitMessage(player, velocity, now)));
    this.stateSnapshot = applyTapFlash(this.stateSnapshot, player, now);
    this.opts.onLocalTap?.(player, velocity);
    this.render();
    return true;
  }

  close(): void {
    this.closedByUs = true;
    if (this.socket !== null) {
      try {
        this.socket.send(serializeClientMessage({ kind: "bye" }));
      } catch {
        /* socket may already be gone */
      }
      this.socket.close();
      this.socket = null;
    }
    this.stateSnapshot = { ...this.stateSnapshot, status: "closed" };
    this.render();
  }

  private handleFrame(text: string): void {
    const localMs = this.opts.now();
    let message: ServerMessage;
    try {
      message = parseServerMessage(text);
    } catch (err) {
      if (err instanceof ProtocolError) {
        this.stateSnapshot = { ...this.stateSnapshot, lastError: err.message };
        this.render();
        return;
      }
      throw err;
    }
    if (message.kind === "state") {
      this.clock.observeState(message.t_ms, localMs);
    }
    if (message.kind === "session" && message.event === "joined" && this.helloSentAtMs !== null) {
      this.clock.observeHelloRtt(localMs - this.helloSentAtMs);
      this.helloSentAtMs = null;
    }
    if (message.kind === "note") {
      const playAtLocalMs = this.clock.synced
        ? this.clock.toLocal(message.play_at_ms)
        : Number.NEGATIVE_INFINITY;
      const outcome = this.scheduler.schedule({
        voice: message.voice,
        pitch: message.pitch,
        gain: message.gain,
        playAtLocalMs,
        durationMs: message.duration_ms,
        chord: message.chord,
      });
      if (outcome === "stale") this.stateSnapshot = countStaleNote(this.stateSnapshot);
      if (outcome === "muted") this.stateSnapshot = countMutedNote(this.stateSnapshot);
    }
    this.stateSnapshot = applyServer(this.stateSnapshot, message, localMs);
    this.render();
  }

  private handleClose(): void {
    this.socket = null;
    if (this.closedByUs) return;
    this.scheduler.clear();
    this.stateSnapshot = applyDisconnect(this.stateSnapshot);
    this.render();
    const retry = this.opts.scheduleRetry ?? ((fn, ms) => setTimeout(fn, ms));
    retry(() => {
      if (!this.closedByUs) this.connect();
    }, this.opts.reconnectDelayMs ?? 1000);
  }

  private render(): void {
    this.opts.onRender(this.stateSnapshot);
  }
}
