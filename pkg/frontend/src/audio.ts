/**
 * WebAudio backing for the note scheduler.
 *
 * Translates local-millisecond start times into AudioContext seconds so
 * voices start on the audio clock, not on a javascript timer. Each
 * voice family gets its own oscillator flavour; taps get a short click
 * so the player hears themselves immediately.
 */

import type { Synth, SynthNote } from "./scheduler.js";

const VOICE_WAVE: Record<string, OscillatorType> = {
  pad: "sine",
  guitar: "triangle",
  bass: "sawtooth",
};

function pitchToHz(pitch: number): number {
  return 440 * Math.pow(2, (pitch - 69) / 12);
}

export class WebAudioSynth implements Synth {
  private readonly ctx: AudioContext;
  private readonly now: () => number;
  private readonly master: GainNode;

  constructor(ctx: AudioContext, now: () => number) {
    this.ctx = ctx;
    this.now = now;
    this.master = ctx.createGain();
    this.master.gain.value = 0.6;
    this.master.connect(ctx.destination);
  }

  /** Map a local-ms timestamp onto the audio clock, never in the past. */
  private audioTime(atMs: number): number {
    const deltaS = (atMs - this.now()) / 1000;
    return this.ctx.currentTime + Math.max(0, deltaS);
  }

  play(note: SynthNote): void {
    const start = this.audioTime(note.atMs);
    const stop = start + note.durationMs / 1000;
    const osc = this.ctx.createOscillator();
    osc.type = VOICE_WAVE[note.voice] ?? "sine";
    osc.frequency.value = pitchToHz(note.pitch);
    const env = this.ctx.createGain();
    env.gain.setValueAtTime(0, start);
    env.gain.linearRampToValueAtTime(note.gain * 0.5, start + 0.01);
    env.gain.setValueAtTime(note.gain * 0.5, Math.max(start + 0.01, stop - 0.05));
    env.gain.linearRampToValueAtTime(0, stop);
    osc.connect(env);
    env.connect(this.master);
    osc.start(start);
    osc.stop(stop + 0.01);
  }

  /** Immediate percussive click confirming a local tap. */
  tapClick(velocity: number): void {
    const start = this.ctx.currentTime;
    const osc = this.ctx.createOscillator();
    osc.type = "square";
    osc.frequency.value = 1800;
    const env = this.ctx.createGain();
    const peak = 0.25 * (velocity / 127);
    env.gain.setValueAtTime(peak, start);
    env.gain.exponentialRampToValueAtTime(0.001, start + 0.04);
    osc.connect(env);
    env.connect(this.master);
    osc.start(start);
    osc.stop(start + 0.05);
  }
}
