/**
 * Browser entry point: wires the page, the service socket, the
 * keyboard and any MIDI pads, and the audio engine together.
 */

import { WebAudioSynth } from "./audio.js";
import { DuetClient, type SocketLike } from "./client.js";
import { parseConfig } from "./config.js";
import type { ConsoleState } from "./console.js";
import { midiTap, playerForKey, TapGate, KEYBOARD_VELOCITY } from "./input.js";
import { NoteScheduler, type Synth, type SynthNote } from "./scheduler.js";
import { buildUi, render } from "./ui.js";

const config = parseConfig(window.location.search, {
  protocol: window.location.protocol,
  host: window.location.host,
});

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app container");
const els = buildUi(root);

const now = () => performance.now();

// Browsers refuse to start audio without a user gesture, so the synth
// appears lazily on the first tap and silently swallows notes before it.
let synth: WebAudioSynth | null = null;
function ensureAudio(): WebAudioSynth {
  if (synth === null) {
    synth = new WebAudioSynth(new AudioContext(), now);
  }
  return synth;
}

const deferringSynth: Synth = {
  play(note: SynthNote): void {
    synth?.play(note);
  },
};

const scheduler = new NoteScheduler(deferringSynth, now);

function nativeSocket(url: string): SocketLike {
  const ws = new WebSocket(url);
  const adapter: SocketLike = {
    send: (data) => ws.send(data),
    close: () => ws.close(),
    onopen: null,
    onmessage: null,
    onclose: null,
    onerror: null,
  };
  ws.onopen = () => adapter.onopen?.();
  ws.onmessage = (event) => adapter.onmessage?.({ data: event.data });
  ws.onclose = () => adapter.onclose?.();
  ws.onerror = () => adapter.onerror?.();
  return adapter;
}

let latest: ConsoleState | null = null;
const client = new DuetClient({
  url: config.wsUrl,
  player: config.player,
  socketFactory: nativeSocket,
  scheduler,
  now,
  onRender: (state) => {
    latest = state;
    render(state, els, now());
  },
  onLocalTap: (_player, velocity) => {
    ensureAudio().tapClick(velocity);
  },
});

const gate = new TapGate();
window.addEventListener("keydown", (event) => {
  if (event.repeat) return;
  if (!gate.down(event.key)) return;
  const player = playerForKey(event.key, config.keys);
  if (player === null) return;
  ensureAudio();
  client.tap(player, KEYBOARD_VELOCITY);
  event.preventDefault();
});
window.addEventListener("keyup", (event) => {
  gate.up(event.key);
});
window.addEventListener("blur", () => gate.reset());

for (const [padEl, player] of [
  [els.pad1, 1],
  [els.pad2, 2],
] as const) {
  padEl.addEventListener("pointerdown", () => {
    ensureAudio();
    client.tap(player, KEYBOARD_VELOCITY);
  });
}

// Web-MIDI pads, when the browser has them: first input drives the
// requested slot, or player 1 when no slot was requested.
if ("requestMIDIAccess" in navigator) {
  navigator
    .requestMIDIAccess()
    .then((access) => {
      const assigned = config.player ?? 1;
      access.inputs.forEach((input) => {
        input.onmidimessage = (event: MIDIMessageEvent) => {
          if (event.data === null) return;
          const tap = midiTap(event.data);
          if (tap === null) return;
          ensureAudio();
          client.tap(assigned, tap.velocity);
        };
      });
    })
    .catch(() => {
      /* no MIDI is fine; the keyboard still works */
    });
}

function frame(): void {
  scheduler.pump();
  if (latest !== null) render(latest, els, now());
  requestAnimationFrame(frame);
}

client.connect();
requestAnimationFrame(frame);
