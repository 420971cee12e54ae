/**
 * Wire protocol for the duet service websocket.
 *
 * Mirrors the JSON messages the server speaks: three client kinds
 * (hello, hit, bye) and four server kinds (state, note, session, error).
 * Parsing is strict about the fields the console relies on so a
 * mismatched server fails loudly instead of rendering garbage.
 */

export const PROTOCOL_VERSION = 1;

export type Player = 1 | 2;

export interface ClientHello {
  kind: "hello";
  player?: Player;
  protocol: number;
}

export interface ClientHit {
  kind: "hit";
  player: Player;
  velocity: number;
  client_t_ms?: number;
}

export interface ClientBye {
  kind: "bye";
}

export type ClientMessage = ClientHello | ClientHit | ClientBye;

export interface ServerState {
  kind: "state";
  t_ms: number;
  level: number;
  points: number;
  bpm: number | null;
  meter: number | null;
  clarity: number | null;
  accompaniment_on: boolean;
  next_downbeat_in_ms: number | null;
}

export interface ServerNote {
  kind: "note";
  voice: string;
  pitch: number;
  gain: number;
  play_at_ms: number;
  duration_ms: number;
  chord: string;
}

export type SessionEvent = "joined" | "partner_joined" | "partner_left" | "closed";

export interface ServerSession {
  kind: "session";
  session_id: string;
  event: SessionEvent;
  player: Player | null;
  config: Record<string, unknown> | null;
  protocol: number;
}

export interface ServerError {
  kind: "error";
  message: string;
}

export type ServerMessage = ServerState | ServerNote | ServerSession | ServerError;

export class ProtocolError extends Error {}

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function requireNumber(raw: Record<string, unknown>, field: string): number {
  const value = raw[field];
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new ProtocolError(`field ${field} must be a finite number`);
  }
  return value;
}

function optionalNumber(raw: Record<string, unknown>, field: string): number | null {
  const value = raw[field];
  if (value === null || value === undefined) return null;
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new ProtocolError(`field ${field} must be a finite number or null`);
  }
  return value;
}

function requireString(raw: Record<string, unknown>, field: string): string {
  const value = raw[field];
  if (typeof value !== "string") {
    throw new ProtocolError(`field ${field} must be a string`);
  }
  return value;
}

function parseState(raw: Record<string, unknown>): ServerState {
  return {
    kind: "state",
    t_ms: requireNumber(raw, "t_ms"),
    level: requireNumber(raw, "level"),
    points: requireNumber(raw, "points"),
    bpm: optionalNumber(raw, "bpm"),
    meter: optionalNumber(raw, "meter"),
    clarity: optionalNumber(raw, "clarity"),
    accompaniment_on: raw["accompaniment_on"] === true,
    next_downbeat_in_ms: optionalNumber(raw, "next_downbeat_in_ms"),
  };
}

function parseNote(raw: Record<string, unknown>): ServerNote {
  return {
    kind: "note",
    voice: requireString(raw, "voice"),
    pitch: requireNumber(raw, "pitch"),
    gain: requireNumber(raw, "gain"),
    play_at_ms: requireNumber(raw, "play_at_ms"),
    duration_ms: requireNumber(raw, "duration_ms"),
    chord: requireString(raw, "chord"),
  };
}

const SESSION_EVENTS: ReadonlySet<string> = new Set([
  "joined",
  "partner_joined",
  "partner_left",
  "closed",
]);

function parseSession(raw: Record<string, unknown>): ServerSession {
  const event = requireString(raw, "event");
  if (!SESSION_EVENTS.has(event)) {
    throw new ProtocolError(`unknown session event ${event}`);
  }
  const player = raw["player"];
  if (player !== null && player !== undefined && player !== 1 && player !== 2) {
    throw new ProtocolError("field player must be 1, 2, or null");
  }
  const config = raw["config"];
  return {
    kind: "session",
    session_id: requireString(raw, "session_id"),
    event: event as SessionEvent,
    player: (player ?? null) as Player | null,
    config: isRecord(config) ? config : null,
    protocol: requireNumber(raw, "protocol"),
  };
}

/** Parse one server frame. Throws ProtocolError on anything unrecognisable. */
export function parseServerMessage(text: string): ServerMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new ProtocolError("frame is not valid JSON");
  }
  if (!isRecord(raw)) {
    throw new ProtocolError("frame must be a JSON object");
  }
  switch (raw["kind"]) {
    case "state":
      return parseState(raw);
    case "note":
      return parseNote(raw);
    case "session":
      return parseSession(raw);
    case "error":
      return { kind: "error", message: requireString(raw, "message") };
    default:
      throw new ProtocolError(`unknown message kind ${String(raw["kind"])}`);
  }
}

export function serializeClientMessage(message: ClientMessage): string {
  return JSON.stringify(message);
}

export function helloMessage(player?: Player): ClientHello {
  const hello: ClientHello = { kind: "hello", protocol: PROTOCOL_VERSION };
  if (player !== undefined) hello.player = player;
  return hello;
}

export function hitMessage(player: Player, velocity: number, clientTms?: number): ClientHit {
  if (velocity < 1 || velocity > 127 || !Number.isInteger(velocity)) {
    throw new ProtocolError("velocity must be an integer in 1..127");
  }
  const hit: ClientHit = { kind: "hit", player, velocity };
  if (clientTms !== undefined) hit.client_t_ms = clientTms;
  return hit;
}
