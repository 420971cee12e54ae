"""Standard MIDI File export of a session's accompaniment.

Produces a format 1 file: track 0 carries the tempo map (one tempo per
resync segment, plus a time signature whenever the adopted meter
changes), then one track per accompaniment voice. Channels and General
MIDI programs come from the session config echoed in the trace header.

Two timing rules worth stating:
  - milliseconds map to ticks piecewise linearly, one linear piece per
    tempo segment, so notes stay aligned with the musical grid the
    generator actually used;
  - a measure cut short by a resync truncates its still-sounding notes
    at the next measure start, which is how the live engine behaved.
Zero-gain notes are omitted entirely: silence exports as silence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .logio import SessionTrace

DEFAULT_PPQ = 480
VOICE_CHANNELS = {"pad": 0, "guitar": 1, "bass": 2}
DEFAULT_BEAT_MS = 500.0


def encode_vlq(value: int) -> bytes:
    """Variable-length quantity, MSB-first, 7 bits per byte."""
    if value < 0:
        raise ValueError(f"delta time must be non-negative, got {value}")
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


@dataclass(frozen=True)
class TempoSegment:
    start_ms: float
    beat_period_ms: float
    meter: int


def tempo_segments(trace: SessionTrace) -> list[TempoSegment]:
    """One segment per resync; tempo can only change there."""
    segments = [
        TempoSegment(rec["t_ms"], rec["beat_period_ms"], rec["meter"])
        for rec in trace.analysis
        if rec["kind"] == "resync"
    ]
    segments.sort(key=lambda s: s.start_ms)
    return segments


class TickMap:
    """Piecewise-linear milliseconds-to-ticks conversion."""

    def __init__(self, segments: list[TempoSegment], ppq: int):
        self.ppq = ppq
        if not segments:
            segments = [TempoSegment(0.0, DEFAULT_BEAT_MS, 4)]
        self.segments = segments
        self._starts_ticks: list[float] = []
        acc = 0.0
        # time zero anchors the map; the first segment may start later
        prev_ms = 0.0
        prev_rate = ppq / segments[0].beat_period_ms
        for seg in segments:
            acc += (seg.start_ms - prev_ms) * prev_rate
            self._starts_ticks.append(acc)
            prev_ms = seg.start_ms
            prev_rate = ppq / seg.beat_period_ms
        self._prev_ms = prev_ms

    def ticks(self, t_ms: float) -> int:
        seg_idx = 0
        for i, seg in enumerate(self.segments):
            if seg.start_ms <= t_ms:
                seg_idx = i
            else:
                break
        seg = self.segments[seg_idx]
        base = self._starts_ticks[seg_idx]
        if t_ms < seg.start_ms:  # before the first segment
            seg_rate = self.ppq / self.segments[0].beat_period_ms
            return int(round(base - (seg.start_ms - t_ms) * seg_rate))
        return int(round(base + (t_ms - seg.start_ms) * self.ppq / seg.beat_period_ms))


def _meta(kind: int, payload: bytes) -> bytes:
    return bytes([0xFF, kind, len(payload)]) + payload


def _tempo_meta(beat_period_ms: float) -> bytes:
    us_per_quarter = max(1, min(0xFFFFFF, int(round(beat_period_ms * 1000.0))))
    return _meta(0x51, us_per_quarter.to_bytes(3, "big"))


def _time_signature_meta(meter: int) -> bytes:
    return _meta(0x58, bytes([meter, 2, 24, 8]))  # denominator 4


def _track_chunk(events: list[tuple[int, int, bytes]]) -> bytes:
    """Assemble one MTrk from (tick, order, payload) events."""
    events.sort(key=lambda e: (e[0], e[1]))
    out = bytearray()
    prev = 0
    for tick, _, payload in events:
        out += encode_vlq(tick - prev)
        out += payload
        prev = tick
    out += encode_vlq(0) + _meta(0x2F, b"")
    return b"MTrk" + len(out).to_bytes(4, "big") + bytes(out)


def _clip_notes(notes: list[dict]) -> list[tuple[float, float, dict]]:
    """Absolute (onset, end) per note, truncated at the next measure start."""
    starts = sorted({n["measure_ms"] for n in notes})
    clipped = []
    for note in notes:
        onset = note["measure_ms"] + note["onset_ms"]
        end = onset + note["duration_ms"]
        idx = starts.index(note["measure_ms"]) + 1
        if idx < len(starts):
            boundary = starts[idx]
            if onset >= boundary:
                continue  # the resync arrived before this note started
            end = min(end, boundary)
        if end > onset:
            clipped.append((onset, end, note))
    return clipped


def export_midi(trace: SessionTrace, *, ppq: int = DEFAULT_PPQ) -> bytes:
    """Render a trace's accompaniment as a format 1 SMF byte string."""
    segments = tempo_segments(trace)
    tick_map = TickMap(segments, ppq)

    conductor: list[tuple[int, int, bytes]] = []
    if not segments:
        conductor.append((0, 0, _tempo_meta(DEFAULT_BEAT_MS)))
        conductor.append((0, 1, _time_signature_meta(4)))
    else:
        last_meter = None
        for seg in segments:
            tick = tick_map.ticks(seg.start_ms)
            conductor.append((tick, 0, _tempo_meta(seg.beat_period_ms)))
            if seg.meter != last_meter:
                conductor.append((tick, 1, _time_signature_meta(seg.meter)))
                last_meter = seg.meter

    programs = {
        "pad": int(trace.config.get("program_pad", 90)),
        "guitar": int(trace.config.get("program_guitar", 25)),
        "bass": int(trace.config.get("program_bass", 34)),
    }
    audible = [n for n in trace.notes if n["gain"] > 0.0]
    clipped = _clip_notes(audible)

    voice_events: dict[str, list[tuple[int, int, bytes]]] = {
        voice: [] for voice in VOICE_CHANNELS
    }
    for voice, channel in VOICE_CHANNELS.items():
        patch = min(127, max(0, programs[voice] - 1))  # 1-based GM numbering
        voice_events[voice].append((0, 0, bytes([0xC0 | channel, patch])))
    for onset, end, note in clipped:
        voice = note["voice"]
        channel = VOICE_CHANNELS[voice]
        pitch = min(127, max(0, int(note["pitch"])))
        velocity = max(1, min(127, int(round(note["gain"] * 127.0))))
        on_tick = tick_map.ticks(onset)
        off_tick = max(on_tick + 1, tick_map.ticks(end))  # keep audible length
        voice_events[voice].append((on_tick, 2, bytes([0x90 | channel, pitch, velocity])))
        voice_events[voice].append((off_tick, 1, bytes([0x80 | channel, pitch, 0x40])))

    tracks = [_track_chunk(conductor)]
    tracks.extend(_track_chunk(voice_events[voice]) for voice in VOICE_CHANNELS)
    header = (
        b"MThd"
        + (6).to_bytes(4, "big")
        + (1).to_bytes(2, "big")
        + len(tracks).to_bytes(2, "big")
        + ppq.to_bytes(2, "big")
    )
    return header + b"".join(tracks)


def write_midi(path: str, trace: SessionTrace, *, ppq: int = DEFAULT_PPQ) -> None:
    with open(path, "wb") as fh:
        fh.write(export_midi(trace, ppq=ppq))
