/**
 * Note queue between the websocket and the synth.
 *
 * Notes arrive with absolute local play times (already clock-mapped).
 * The queue holds only future notes; pump() hands anything due within
 * the lookahead window to the synth, tagged with its exact start time,
 * in play-time order no matter what order the frames arrived in.
 */

export interface SynthNote {
  voice: string;
  pitch: number;
  gain: number;
  atMs: number;
  durationMs: number;
}

export interface Synth {
  /** Start one voice at the given local time. Never called with gain <= 0. */
  play(note: SynthNote): void;
}

export interface QueuedNote {
  voice: string;
  pitch: number;
  gain: number;
  playAtLocalMs: number;
  durationMs: number;
  chord: string;
}

export type ScheduleOutcome = "queued" | "stale" | "muted";

export interface SchedulerStats {
  queued: number;
  played: number;
  stale: number;
  muted: number;
}

export class NoteScheduler {
  private readonly queue: QueuedNote[] = [];
  private readonly synth: Synth;
  private readonly now: () => number;
  readonly lookaheadMs: number;
  readonly stats: SchedulerStats = { queued: 0, played: 0, stale: 0, muted: 0 };

  constructor(synth: Synth, now: () => number, lookaheadMs = 150) {
    this.synth = synth;
    this.now = now;
    this.lookaheadMs = lookaheadMs;
  }

  get pending(): number {
    return this.queue.length;
  }

  /** Accept one note. Stale and silent notes never reach the synth. */
  schedule(note: QueuedNote): ScheduleOutcome {
    if (note.playAtLocalMs < this.now()) {
      this.stats.stale += 1;
      return "stale";
    }
    if (note.gain <= 0) {
      this.stats.muted += 1;
      return "muted";
    }
    // Insert behind any equal play time so arrival order breaks ties.
    let index = this.queue.length;
    while (index > 0) {
      const ahead = this.queue[index - 1];
      if (ahead !== undefined && ahead.playAtLocalMs <= note.playAtLocalMs) break;
      index -= 1;
    }
    this.queue.splice(index, 0, note);
    this.stats.queued += 1;
    return "queued";
  }

  /** Start every queued note due within the lookahead window. */
  pump(): void {
    const horizon = this.now() + this.lookaheadMs;
    while (this.queue.length > 0) {
      const head = this.queue[0];
      if (head === undefined || head.playAtLocalMs > horizon) break;
      this.queue.shift();
      this.synth.play({
        voice: head.voice,
        pitch: head.pitch,
        gain: head.gain,
        atMs: head.playAtLocalMs,
        durationMs: head.durationMs,
      });
      this.stats.played += 1;
    }
  }

  clear(): void {
    this.queue.length = 0;
  }
}
