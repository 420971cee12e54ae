"""Line-delimited event-log and session-trace serialization.

Both formats are JSON-lines with a version header as the first line.

Event log ("padlog"): header carries the session duration; every other
line is one pad hit {t_ms, player, velocity}. Timestamps must be
non-decreasing per player.

Trace ("padtrace"): header carries the full session config; analysis
records ({kind: tick} and {kind: resync}) follow in time order, then the
generated notes as {kind: note} records. Field order is fixed so that
identical sessions serialize to identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import MalformedLog
from .signals import PadEvent

LOG_FORMAT = "padlog"
TRACE_FORMAT = "padtrace"
FORMAT_VERSION = 1

_COMPACT = {"separators": (",", ":")}


@dataclass
class SessionTrace:
    """A fully serialized session: config echo, analysis rows, notes."""

    config: dict
    analysis: list[dict]
    notes: list[dict]

    def serialize(self) -> str:
        lines = [
            json.dumps(
                {"format": TRACE_FORMAT, "version": FORMAT_VERSION, "config": self.config},
                **_COMPACT,
            )
        ]
        lines.extend(json.dumps(rec, **_COMPACT) for rec in self.analysis)
        lines.extend(json.dumps(rec, **_COMPACT) for rec in self.notes)
        return "\n".join(lines) + "\n"


def serialize_event_log(events: list[PadEvent], duration_ms: int) -> str:
    lines = [
        json.dumps(
            {"format": LOG_FORMAT, "version": FORMAT_VERSION, "duration_ms": duration_ms},
            **_COMPACT,
        )
    ]
    for e in events:
        lines.append(
            json.dumps({"t_ms": e.t_ms, "player": e.player, "velocity": e.velocity}, **_COMPACT)
        )
    return "\n".join(lines) + "\n"


def _parse_header(line: str, expected_format: str, line_no: int) -> dict:
    try:
        header = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedLog(line_no, f"header is not valid JSON: {exc.msg}") from exc
    if not isinstance(header, dict) or header.get("format") != expected_format:
        raise MalformedLog(line_no, f"expected a {expected_format} header line")
    if header.get("version") != FORMAT_VERSION:
        raise MalformedLog(line_no, f"unsupported version {header.get('version')!r}")
    return header


def parse_event_log(text: str) -> tuple[list[PadEvent], int]:
    """Parse a padlog; returns (events, duration_ms).

    Raises MalformedLog with the 1-based offending line number on any
    structural problem, including per-player timestamp regressions.
    """
    lines = text.splitlines()
    if not lines:
        raise MalformedLog(1, "empty log: missing header")
    header = _parse_header(lines[0], LOG_FORMAT, 1)
    duration = header.get("duration_ms")
    if not isinstance(duration, int) or duration < 0:
        raise MalformedLog(1, "header duration_ms must be a non-negative integer")
    events: list[PadEvent] = []
    last_t = {1: -1, 2: -1}
    for idx, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLog(idx, f"not valid JSON: {exc.msg}") from exc
        if not isinstance(rec, dict):
            raise MalformedLog(idx, "event line must be a JSON object")
        try:
            event = PadEvent(
                t_ms=rec["t_ms"], player=rec["player"], velocity=rec["velocity"]
            )
        except KeyError as exc:
            raise MalformedLog(idx, f"missing field {exc.args[0]}") from exc
        except (TypeError, ValueError) as exc:
            raise MalformedLog(idx, str(exc)) from exc
        if event.t_ms < last_t[event.player]:
            raise MalformedLog(
                idx, f"player {event.player} timestamps regress ({event.t_ms} < {last_t[event.player]})"
            )
        last_t[event.player] = event.t_ms
        events.append(event)
    return events, duration


def read_event_log(path: str) -> tuple[list[PadEvent], int]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_event_log(fh.read())


def parse_trace(text: str) -> SessionTrace:
    lines = text.splitlines()
    if not lines:
        raise MalformedLog(1, "empty trace: missing header")
    header = _parse_header(lines[0], TRACE_FORMAT, 1)
    config = header.get("config")
    if not isinstance(config, dict):
        raise MalformedLog(1, "header config must be an object")
    analysis: list[dict] = []
    notes: list[dict] = []
    for idx, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLog(idx, f"not valid JSON: {exc.msg}") from exc
        kind = rec.get("kind") if isinstance(rec, dict) else None
        if kind in ("tick", "resync"):
            analysis.append(rec)
        elif kind == "note":
            notes.append(rec)
        else:
            raise MalformedLog(idx, f"unknown record kind {kind!r}")
    return SessionTrace(config=config, analysis=analysis, notes=notes)


def read_trace(path: str) -> SessionTrace:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_trace(fh.read())
