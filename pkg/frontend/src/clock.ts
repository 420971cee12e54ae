/**
 * Maps server timestamps onto the local monotonic clock.
 *
 * The server stamps every state and note with its own session clock.
 * The console needs local play times for audio scheduling, so it keeps
 * a running estimate of (local - server) built from two observations:
 * the hello round trip gives a transit estimate, and every state frame
 * gives an offset sample. One-way delay only ever inflates a sample,
 * so the minimum sample is the best available bound.
 */

export class ServerClock {
  private transitMs = 0;
  private rawOffsetMs: number | null = null;

  /** Record the hello round trip; half of it approximates one-way transit. */
  observeHelloRtt(rttMs: number): void {
    if (rttMs >= 0) this.transitMs = rttMs / 2;
  }

  /** Record a server-stamped frame and the local time it arrived. */
  observeState(serverTms: number, localMs: number): void {
    const sample = localMs - serverTms;
    if (this.rawOffsetMs === null || sample < this.rawOffsetMs) {
      this.rawOffsetMs = sample;
    }
  }

  get synced(): boolean {
    return this.rawOffsetMs !== null;
  }

  /**
   * Convert a server timestamp to local time. Before the first state
   * frame there is no offset estimate; callers should treat the result
   * as unusable until synced is true.
   */
  toLocal(serverMs: number): number {
    if (this.rawOffsetMs === null) return serverMs;
    return serverMs + this.rawOffsetMs - this.transitMs;
  }
}
