/**
 * Console state and its reducer.
 *
 * Everything the page shows lives in one immutable snapshot. Server
 * frames fold into it with no reinterpretation: the level, points,
 * tempo, and meter shown are exactly the latest state message's
 * values. Local concerns (connection phase, tap flashes, dropped-note
 * diagnostics) ride alongside.
 */

import type { Player, ServerMessage } from "./protocol.js";

export type ConnectionStatus = "connecting" | "joined" | "reconnecting" | "closed";

export interface ConsoleState {
  status: ConnectionStatus;
  sessionId: string | null;
  player: Player | null;
  partnerPresent: boolean;
  level: number;
  points: number;
  bpm: number | null;
  meter: number | null;
  clarity: number | null;
  accompanimentOn: boolean;
  nextDownbeatInMs: number | null;
  lastStateLocalMs: number | null;
  tapFlashMs: { 1: number | null; 2: number | null };
  staleNotes: number;
  mutedNotes: number;
  notesHeard: number;
  lastError: string | null;
}

export function initialState(): ConsoleState {
  return {
    status: "connecting",
    sessionId: null,
    player: null,
    partnerPresent: false,
    level: 0,
    points: 0,
    bpm: null,
    meter: null,
    clarity: null,
    accompanimentOn: false,
    nextDownbeatInMs: null,
    lastStateLocalMs: null,
    tapFlashMs: { 1: null, 2: null },
    staleNotes: 0,
    mutedNotes: 0,
    notesHeard: 0,
    lastError: null,
  };
}

/** Fold one server frame into the snapshot. Notes are counted, not stored. */
export function applyServer(
  state: ConsoleState,
  message: ServerMessage,
  localMs: number,
): ConsoleState {
  switch (message.kind) {
    case "state":
      return {
        ...state,
        level: message.level,
        points: message.points,
        bpm: message.bpm,
        meter: message.meter,
        clarity: message.clarity,
        accompanimentOn: message.accompaniment_on,
        nextDownbeatInMs: message.next_downbeat_in_ms,
        lastStateLocalMs: localMs,
      };
    case "note":
      return { ...state, notesHeard: state.notesHeard + 1 };
    case "session":
      switch (message.event) {
        case "joined":
          return {
            ...state,
            status: "joined",
            sessionId: message.session_id,
            player: message.player,
            lastError: null,
          };
        case "partner_joined":
          return { ...state, partnerPresent: true };
        case "partner_left":
          return { ...state, partnerPresent: false };
        case "closed":
          return { ...state, status: "closed" };
      }
      return state;
    case "error":
      return { ...state, lastError: message.message };
  }
}

export function applyTapFlash(state: ConsoleState, player: Player, localMs: number): ConsoleState {
  return { ...state, tapFlashMs: { ...state.tapFlashMs, [player]: localMs } };
}

export function applyDisconnect(state: ConsoleState): ConsoleState {
  if (state.status === "closed") return state;
  return { ...state, status: "reconnecting" };
}

export function countStaleNote(state: ConsoleState): ConsoleState {
  return { ...state, staleNotes: state.staleNotes + 1 };
}

export function countMutedNote(state: ConsoleState): ConsoleState {
  return { ...state, mutedNotes: state.mutedNotes + 1 };
}
