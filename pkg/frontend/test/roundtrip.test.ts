/**
 * End-to-end console behaviour against a loopback server: the full
 * tap -> hit -> state -> render path, point monotonicity as rendered,
 * silence for gain-zero notes, and reconnect handling.
 */

import { describe, expect, it } from "vitest";

import { DuetClient } from "../src/client.js";
import type { ConsoleState } from "../src/console.js";
import { DEFAULT_KEYS, KEYBOARD_VELOCITY, playerForKey, TapGate } from "../src/input.js";
import { NoteScheduler, type SynthNote } from "../src/scheduler.js";
import { loopbackServer, settle, type LoopbackServer } from "./helpers.js";

interface Rig {
  client: DuetClient;
  server: LoopbackServer;
  renders: ConsoleState[];
  played: SynthNote[];
  scheduler: NoteScheduler;
  retries: Array<() => void>;
  pressKey(key: string): boolean;
  releaseKey(key: string): void;
}

function buildRig(): Rig {
  const server = loopbackServer();
  const renders: ConsoleState[] = [];
  const played: SynthNote[] = [];
  const now = () => performance.now();
  const scheduler = new NoteScheduler({ play: (n) => played.push(n) }, now);
  const retries: Array<() => void> = [];
  const client = new DuetClient({
    url: "ws://loopback/ws/test",
    socketFactory: server.factory,
    scheduler,
    now,
    onRender: (state) => renders.push(state),
    scheduleRetry: (fn) => retries.push(fn),
  });
  const gate = new TapGate();
  return {
    client,
    server,
    renders,
    played,
    scheduler,
    retries,
    // The same interpretation the page's keydown handler applies.
    pressKey(key: string): boolean {
      if (!gate.down(key)) return false;
      const player = playerForKey(key, DEFAULT_KEYS);
      if (player === null) return false;
      return client.tap(player, KEYBOARD_VELOCITY);
    },
    releaseKey(key: string): void {
      gate.up(key);
    },
  };
}

async function joined(rig: Rig): Promise<void> {
  rig.client.connect();
  await settle();
  expect(rig.client.state.status).toBe("joined");
}

describe("console round trip on loopback", () => {
  it("a key tap reaches the server and renders fresh state within 200 ms", async () => {
    const rig = buildRig();
    await joined(rig);

    const before = rig.client.state.points;
    const t0 = performance.now();
    expect(rig.pressKey("f")).toBe(true);
    await settle();
    const rendered = rig.renders.find((s) => s.points > before);
    const t1 = performance.now();

    expect(rendered).toBeDefined();
    expect(t1 - t0).toBeLessThan(200);
    const hit = rig.server.received.find((m) => m.kind === "hit");
    expect(hit).toMatchObject({ kind: "hit", player: 1, velocity: KEYBOARD_VELOCITY });
  });

  it("held keys do not machine-gun hits", async () => {
    const rig = buildRig();
    await joined(rig);

    expect(rig.pressKey("f")).toBe(true);
    expect(rig.pressKey("f")).toBe(false);
    expect(rig.pressKey("f")).toBe(false);
    rig.releaseKey("f");
    expect(rig.pressKey("f")).toBe(true);
    await settle();

    const hits = rig.server.received.filter((m) => m.kind === "hit");
    expect(hits).toHaveLength(2);
  });

  it("rendered points never decrease across a session", async () => {
    const rig = buildRig();
    await joined(rig);

    for (const key of ["f", "j", "f", "j", "f", "j"]) {
      rig.pressKey(key);
      rig.releaseKey(key);
      await settle();
    }

    const pointsSeen = rig.renders.map((s) => s.points);
    expect(pointsSeen.length).toBeGreaterThan(5);
    for (let i = 1; i < pointsSeen.length; i += 1) {
      const prev = pointsSeen[i - 1] ?? 0;
      expect(pointsSeen[i]).toBeGreaterThanOrEqual(prev);
    }
    expect(pointsSeen[pointsSeen.length - 1]).toBe(6);
  });

  it("a gain-zero note starts no voice; an audible one does", async () => {
    const rig = buildRig();
    await joined(rig);

    // A state frame first, so note play times can be clock-mapped.
    rig.pressKey("f");
    await settle();

    const playAt = 10_000_000; // far future on the server clock
    rig.server.send({
      kind: "note",
      voice: "pad",
      pitch: 60,
      gain: 0,
      play_at_ms: playAt,
      duration_ms: 400,
      chord: "C",
    });
    rig.server.send({
      kind: "note",
      voice: "bass",
      pitch: 36,
      gain: 0.7,
      play_at_ms: playAt,
      duration_ms: 400,
      chord: "C",
    });
    await settle();

    expect(rig.scheduler.stats.muted).toBe(1);
    expect(rig.scheduler.pending).toBe(1);
    expect(rig.client.state.mutedNotes).toBe(1);
    expect(rig.played).toHaveLength(0); // nothing due yet either way
  });

  it("late notes are dropped and surface in the diagnostics counters", async () => {
    const rig = buildRig();
    await joined(rig);
    rig.pressKey("f");
    await settle();

    rig.server.send({
      kind: "note",
      voice: "guitar",
      pitch: 64,
      gain: 0.5,
      play_at_ms: -1_000_000, // long past on the server clock
      duration_ms: 100,
      chord: "F",
    });
    await settle();

    expect(rig.scheduler.stats.stale).toBe(1);
    expect(rig.client.state.staleNotes).toBe(1);
    expect(rig.played).toHaveLength(0);
  });

  it("malformed frames surface as errors without killing the session", async () => {
    const rig = buildRig();
    await joined(rig);

    rig.server.sendRaw("{broken");
    await settle();
    expect(rig.client.state.lastError).toContain("JSON");

    rig.pressKey("f");
    await settle();
    expect(rig.client.state.points).toBe(1);
  });

  it("a dropped connection shows reconnecting, drops taps, then rejoins", async () => {
    const rig = buildRig();
    await joined(rig);

    rig.server.dropConnection();
    await settle();
    expect(rig.client.state.status).toBe("reconnecting");
    expect(rig.pressKey("f")).toBe(false);
    expect(rig.server.received.filter((m) => m.kind === "hit")).toHaveLength(0);
    expect(rig.retries).toHaveLength(1);

    rig.retries[0]?.();
    await settle();
    expect(rig.client.state.status).toBe("joined");
    expect(rig.server.connections).toBe(2);
  });
});
