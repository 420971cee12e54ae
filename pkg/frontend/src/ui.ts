/**
 * DOM construction and rendering for the console page.
 *
 * buildUi makes the element tree once; render projects a ConsoleState
 * snapshot onto it. Rendering is write-only and idempotent so it can
 * run on every frame and every animation tick without churn.
 */

import type { ConsoleState } from "./console.js";

const FLASH_MS = 150;

export interface UiElements {
  status: HTMLElement;
  session: HTMLElement;
  levelBar: HTMLElement;
  levelLabel: HTMLElement;
  points: HTMLElement;
  bpm: HTMLElement;
  meter: HTMLElement;
  downbeatBar: HTMLElement;
  pad1: HTMLElement;
  pad2: HTMLElement;
  diagnostics: HTMLElement;
  error: HTMLElement;
}

function el(doc: Document, tag: string, className: string, parent: HTMLElement): HTMLElement {
  const node = doc.createElement(tag);
  node.className = className;
  parent.appendChild(node);
  return node;
}

export function buildUi(root: HTMLElement): UiElements {
  const doc = root.ownerDocument;
  root.classList.add("console");

  const header = el(doc, "header", "top", root);
  const status = el(doc, "span", "status", header);
  const session = el(doc, "span", "session", header);

  const stage = el(doc, "main", "stage", root);

  const levelBox = el(doc, "section", "level-box", stage);
  const levelTrack = el(doc, "div", "level-track", levelBox);
  const levelBar = el(doc, "div", "level-bar", levelTrack);
  const levelLabel = el(doc, "div", "level-label", levelBox);

  const scoreBox = el(doc, "section", "score-box", stage);
  const points = el(doc, "div", "points", scoreBox);
  const tempoRow = el(doc, "div", "tempo-row", scoreBox);
  const bpm = el(doc, "span", "bpm", tempoRow);
  const meter = el(doc, "span", "meter", tempoRow);
  const downbeatTrack = el(doc, "div", "downbeat-track", scoreBox);
  const downbeatBar = el(doc, "div", "downbeat-bar", downbeatTrack);

  const pads = el(doc, "section", "pads", stage);
  const pad1 = el(doc, "div", "pad pad-1", pads);
  pad1.textContent = "1";
  const pad2 = el(doc, "div", "pad pad-2", pads);
  pad2.textContent = "2";

  const footer = el(doc, "footer", "bottom", root);
  const diagnostics = el(doc, "span", "diagnostics", footer);
  const error = el(doc, "span", "error", footer);

  return {
    status,
    session,
    levelBar,
    levelLabel,
    points,
    bpm,
    meter,
    downbeatBar,
    pad1,
    pad2,
    diagnostics,
    error,
  };
}

const STATUS_TEXT: Record<ConsoleState["status"], string> = {
  connecting: "connecting...",
  joined: "live",
  reconnecting: "connection lost, retrying...",
  closed: "session closed",
};

/** Fraction of the current measure already elapsed, 0..1, or null. */
export function downbeatProgress(state: ConsoleState, nowMs: number): number | null {
  if (
    state.bpm === null ||
    state.meter === null ||
    state.nextDownbeatInMs === null ||
    state.lastStateLocalMs === null
  ) {
    return null;
  }
  const measureMs = (60000 / state.bpm) * state.meter;
  if (!(measureMs > 0)) return null;
  const remaining = state.nextDownbeatInMs - (nowMs - state.lastStateLocalMs);
  const clamped = Math.min(measureMs, Math.max(0, remaining));
  return 1 - clamped / measureMs;
}

export function render(state: ConsoleState, els: UiElements, nowMs: number): void {
  els.status.textContent = STATUS_TEXT[state.status];
  els.status.dataset["status"] = state.status;
  els.session.textContent =
    state.sessionId === null
      ? ""
      : `${state.sessionId}${state.player === null ? "" : ` / player ${state.player}`}` +
        (state.partnerPresent ? " / partner in" : " / waiting for partner");

  els.levelBar.style.width = `${(state.level / 3) * 100}%`;
  els.levelBar.dataset["level"] = String(state.level);
  els.levelLabel.textContent = `level ${state.level}`;

  els.points.textContent = String(state.points);
  els.bpm.textContent = state.bpm === null ? "tempo --" : `${Math.round(state.bpm)} bpm`;
  els.meter.textContent = state.meter === null ? "" : `${state.meter}/4 feel`;

  const progress = downbeatProgress(state, nowMs);
  els.downbeatBar.style.width = progress === null ? "0%" : `${progress * 100}%`;
  els.downbeatBar.dataset["active"] = progress === null ? "no" : "yes";

  const flash1 = state.tapFlashMs[1];
  const flash2 = state.tapFlashMs[2];
  els.pad1.classList.toggle("lit", flash1 !== null && nowMs - flash1 < FLASH_MS);
  els.pad2.classList.toggle("lit", flash2 !== null && nowMs - flash2 < FLASH_MS);

  els.diagnostics.textContent =
    `notes ${state.notesHeard}` +
    (state.staleNotes > 0 ? ` / late ${state.staleNotes}` : "") +
    (state.mutedNotes > 0 ? ` / muted ${state.mutedNotes}` : "") +
    (state.accompanimentOn ? " / band on" : "");
  els.error.textContent = state.lastError ?? "";
}
