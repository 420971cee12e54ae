/**
 * Loopback plumbing for client tests: paired in-memory sockets and a
 * miniature duet server that speaks the same wire protocol as the real
 * service. Frames cross the pair on microtasks, so delivery is
 * asynchronous but effectively instant.
 */

import type { SocketFactory, SocketLike } from "../src/client.js";
import type { ClientMessage, Player, ServerMessage } from "../src/protocol.js";

class FakeSocket implements SocketLike {
  onopen: (() => void) | null = null;
  onmessage: ((event: { data: unknown }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;
  peer: FakeSocket | null = null;
  closed = false;

  send(data: string): void {
    if (this.closed) throw new Error("send on closed socket");
    const peer = this.peer;
    if (peer === null || peer.closed) return;
    queueMicrotask(() => {
      if (!peer.closed) peer.onmessage?.({ data });
    });
  }

  close(): void {
    if (this.closed) return;
    this.closed = true;
    const peer = this.peer;
    queueMicrotask(() => {
      this.onclose?.();
      if (peer !== null && !peer.closed) {
        peer.closed = true;
        peer.onclose?.();
      }
    });
  }
}

export function socketPair(): [FakeSocket, FakeSocket] {
  const a = new FakeSocket();
  const b = new FakeSocket();
  a.peer = b;
  b.peer = a;
  return [a, b];
}

/** Drain queued microtasks so in-flight frames land. */
export async function settle(rounds = 6): Promise<void> {
  for (let i = 0; i < rounds; i += 1) {
    await Promise.resolve();
  }
}

export interface LoopbackServer {
  factory: SocketFactory;
  received: ClientMessage[];
  send(message: ServerMessage): void;
  sendRaw(text: string): void;
  dropConnection(): void;
  connections: number;
}

export interface LoopbackOptions {
  sessionId?: string;
  /** Points added per accepted hit; states echo the running total. */
  pointsPerHit?: number;
  onHit?: (server: LoopbackServer) => void;
}

/**
 * A one-player stand-in for the real service: answers hello with a
 * session joined frame and answers every hit with a fresh state frame
 * whose points only ever grow.
 */
export function loopbackServer(options: LoopbackOptions = {}): LoopbackServer {
  const sessionId = options.sessionId ?? "test";
  const pointsPerHit = options.pointsPerHit ?? 1;
  let serverSide: FakeSocket | null = null;
  let points = 0;
  let serverT = 0;

  const server: LoopbackServer = {
    received: [],
    connections: 0,
    factory: (_url: string): SocketLike => {
      const [clientSide, newServerSide] = socketPair();
      serverSide = newServerSide;
      server.connections += 1;
      newServerSide.onmessage = (event) => {
        if (typeof event.data !== "string") return;
        const message = JSON.parse(event.data) as ClientMessage;
        server.received.push(message);
        if (message.kind === "hello") {
          server.send({
            kind: "session",
            session_id: sessionId,
            event: "joined",
            player: (message.player ?? 1) as Player,
            config: { sigma_ms: 30 },
            protocol: 1,
          });
        } else if (message.kind === "hit") {
          points += pointsPerHit;
          serverT += 10;
          server.send({
            kind: "state",
            t_ms: serverT,
            level: 1,
            points,
            bpm: null,
            meter: null,
            clarity: 0.2,
            accompaniment_on: false,
            next_downbeat_in_ms: null,
          });
          options.onHit?.(server);
        }
      };
      queueMicrotask(() => clientSide.onopen?.());
      return clientSide;
    },
    send(message: ServerMessage): void {
      serverSide?.send(JSON.stringify(message));
    },
    sendRaw(text: string): void {
      serverSide?.send(text);
    },
    dropConnection(): void {
      serverSide?.close();
      serverSide = null;
    },
  };
  return server;
}
