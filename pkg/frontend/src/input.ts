/**
 * Tap sources: keyboard keys and Web-MIDI pads.
 *
 * Keyboard taps carry a fixed velocity since keys are binary; pads pass
 * their measured velocity through untouched. Held keys must not
 * machine-gun hits, so a small gate tracks which keys are down and
 * admits only fresh presses.
 */

import type { Player } from "./protocol.js";

export const KEYBOARD_VELOCITY = 100;

export interface KeyMap {
  1: string;
  2: string;
}

export const DEFAULT_KEYS: KeyMap = { 1: "f", 2: "j" };

/** Which player a key tap belongs to, or null for unmapped keys. */
export function playerForKey(key: string, map: KeyMap): Player | null {
  const lowered = key.toLowerCase();
  if (lowered === map[1].toLowerCase()) return 1;
  if (lowered === map[2].toLowerCase()) return 2;
  return null;
}

/** Admits each physical key press once until the key is released. */
export class TapGate {
  private readonly held = new Set<string>();

  down(key: string): boolean {
    if (this.held.has(key)) return false;
    this.held.add(key);
    return true;
  }

  up(key: string): void {
    this.held.delete(key);
  }

  reset(): void {
    this.held.clear();
  }
}

export interface MidiTap {
  velocity: number;
}

/**
 * Interpret a raw MIDI message as a pad tap. Only note-on with nonzero
 * velocity counts; note-off and running-status noise are ignored.
 */
export function midiTap(data: Uint8Array | number[]): MidiTap | null {
  const status = data[0];
  const velocity = data[2];
  if (status === undefined || velocity === undefined) return null;
  if ((status & 0xf0) !== 0x90) return null;
  if (velocity < 1) return null;
  return { velocity: Math.min(127, velocity) };
}
