import { describe, expect, it } from "vitest";

import { ServerClock } from "../src/clock.js";

describe("server clock mapping", () => {
  it("is unusable until the first state frame", () => {
    const clock = new ServerClock();
    expect(clock.synced).toBe(false);
    clock.observeState(1000, 5000);
    expect(clock.synced).toBe(true);
  });

  it("maps server times using offset minus half the hello round trip", () => {
    const clock = new ServerClock();
    clock.observeHelloRtt(20);
    // Server stamped 1000, arrived at local 5000: raw offset 4000.
    clock.observeState(1000, 5000);
    expect(clock.toLocal(2000)).toBeCloseTo(2000 + 4000 - 10);
  });

  it("keeps the smallest offset sample since delay only inflates it", () => {
    const clock = new ServerClock();
    clock.observeState(1000, 5040); // slow frame
    clock.observeState(2000, 6000); // fast frame, offset 4000
    clock.observeState(3000, 7080); // slow again, ignored
    expect(clock.toLocal(0)).toBeCloseTo(4000);
  });

  it("ignores negative round trips", () => {
    const clock = new ServerClock();
    clock.observeHelloRtt(-5);
    clock.observeState(0, 100);
    expect(clock.toLocal(0)).toBeCloseTo(100);
  });
});
