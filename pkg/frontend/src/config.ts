/**
 * Page configuration from the URL query string.
 *
 * ?server=ws://host:port  websocket base (default: the page's own origin)
 * ?session=name           session id, default "duet"
 * ?player=1|2             request a specific slot, default first free
 * ?p1=f&p2=j              keyboard keys for each player
 */

import { DEFAULT_KEYS, type KeyMap } from "./input.js";
import type { Player } from "./protocol.js";

export interface PageOrigin {
  protocol: string;
  host: string;
}

export interface ConsoleConfig {
  wsUrl: string;
  sessionId: string;
  player: Player | undefined;
  keys: KeyMap;
}

function wsBase(params: URLSearchParams, origin: PageOrigin): string {
  const override = params.get("server");
  if (override !== null && override !== "") {
    return override.replace(/\/+$/, "");
  }
  const scheme = origin.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${origin.host}`;
}

export function parseConfig(search: string, origin: PageOrigin): ConsoleConfig {
  const params = new URLSearchParams(search);
  const sessionId = params.get("session") ?? "duet";
  const playerParam = params.get("player");
  const player: Player | undefined =
    playerParam === "1" ? 1 : playerParam === "2" ? 2 : undefined;
  const keys: KeyMap = {
    1: params.get("p1") ?? DEFAULT_KEYS[1],
    2: params.get("p2") ?? DEFAULT_KEYS[2],
  };
  return {
    wsUrl: `${wsBase(params, origin)}/ws/${encodeURIComponent(sessionId)}`,
    sessionId,
    player,
    keys,
  };
}
