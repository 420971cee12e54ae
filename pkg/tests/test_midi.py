"""MIDI export, verified with an independent little SMF reader.

The reader below decodes chunks, variable-length deltas, and running
time from scratch so the exporter is checked against the file format
itself rather than against its own helpers.
"""

import math

import pytest

from padduet.config import SessionConfig
from padduet.logio import SessionTrace
from padduet.midi import DEFAULT_PPQ, encode_vlq, export_midi
from padduet.session import replay_events
from padduet.synthlog import metronome_log


def read_vlq(data: bytes, pos: int) -> tuple[int, int]:
    value = 0
    while True:
        byte = data[pos]
        pos += 1
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value, pos


def parse_smf(blob: bytes) -> dict:
    assert blob[:4] == b"MThd"
    assert int.from_bytes(blob[4:8], "big") == 6
    fmt = int.from_bytes(blob[8:10], "big")
    ntrks = int.from_bytes(blob[10:12], "big")
    ppq = int.from_bytes(blob[12:14], "big")
    pos = 14
    tracks = []
    for _ in range(ntrks):
        assert blob[pos : pos + 4] == b"MTrk"
        length = int.from_bytes(blob[pos + 4 : pos + 8], "big")
        body = blob[pos + 8 : pos + 8 + length]
        pos += 8 + length
        tracks.append(parse_track(body))
    assert pos == len(blob), "trailing bytes after the last track"
    return {"format": fmt, "ppq": ppq, "tracks": tracks}


def parse_track(body: bytes) -> list[dict]:
    events = []
    tick = 0
    pos = 0
    while pos < len(body):
        delta, pos = read_vlq(body, pos)
        tick += delta
        status = body[pos]
        pos += 1
        if status == 0xFF:
            kind = body[pos]
            size, pos = read_vlq(body, pos + 1)
            payload = body[pos : pos + size]
            pos += size
            events.append({"tick": tick, "meta": kind, "data": payload})
            if kind == 0x2F:
                break
        elif status & 0xF0 in (0x80, 0x90):
            events.append(
                {
                    "tick": tick,
                    "type": "on" if status & 0xF0 == 0x90 else "off",
                    "channel": status & 0x0F,
                    "pitch": body[pos],
                    "velocity": body[pos + 1],
                }
            )
            pos += 2
        elif status & 0xF0 == 0xC0:
            events.append({"tick": tick, "type": "program", "channel": status & 0x0F, "program": body[pos]})
            pos += 1
        else:
            raise AssertionError(f"unexpected status byte {status:#x}")
    assert events and events[-1].get("meta") == 0x2F, "missing end of track"
    return events


def note_pairs(track: list[dict]) -> list[dict]:
    """Match note-ons with their note-offs, error on dangling notes."""
    open_notes: dict[int, dict] = {}
    pairs = []
    for ev in track:
        if ev.get("type") == "on":
            assert ev["pitch"] not in open_notes, "overlapping same-pitch notes"
            open_notes[ev["pitch"]] = ev
        elif ev.get("type") == "off":
            started = open_notes.pop(ev["pitch"])
            pairs.append(
                {
                    "pitch": ev["pitch"],
                    "velocity": started["velocity"],
                    "on": started["tick"],
                    "off": ev["tick"],
                    "channel": ev["channel"],
                }
            )
    assert not open_notes, "note-on without note-off"
    return pairs


def tempo_map(track: list[dict]) -> list[tuple[int, int]]:
    return [(e["tick"], int.from_bytes(e["data"], "big")) for e in track if e.get("meta") == 0x51]


# -- vlq ---------------------------------------------------------------


@pytest.mark.parametrize(
    "value, expected",
    [
        (0, b"\x00"),
        (0x7F, b"\x7f"),
        (0x80, b"\x81\x00"),
        (0x2000, b"\xc0\x00"),
        (0x0FFFFFFF, b"\xff\xff\xff\x7f"),
    ],
)
def test_vlq_known_values(value, expected):
    # well-known variable-length-quantity reference encodings
    assert encode_vlq(value) == expected


def test_vlq_round_trip():
    for value in (0, 1, 127, 128, 1000, 123456, 2**27):
        blob = encode_vlq(value)
        decoded, pos = read_vlq(blob, 0)
        assert (decoded, pos) == (value, len(blob))


def test_vlq_rejects_negative():
    with pytest.raises(ValueError):
        encode_vlq(-1)


# -- structural export checks -------------------------------------------


def make_trace(analysis, notes, config=None) -> SessionTrace:
    cfg = (config or SessionConfig()).to_dict()
    return SessionTrace(config=cfg, analysis=analysis, notes=notes)


def resync_record(t_ms, beat_ms=500.0, meter=4):
    return {
        "kind": "resync",
        "t_ms": t_ms,
        "player": 1,
        "matched_prediction_ms": t_ms,
        "beat_period_ms": beat_ms,
        "meter": meter,
        "chord": "C",
    }


def note_record(measure_ms, voice, pitch, onset_ms, duration_ms, gain=1.0):
    return {
        "kind": "note",
        "measure_ms": measure_ms,
        "chord": "C",
        "voice": voice,
        "pitch": pitch,
        "onset_ms": onset_ms,
        "duration_ms": duration_ms,
        "gain": gain,
    }


def test_empty_trace_exports_skeleton():
    smf = parse_smf(export_midi(make_trace([], [])))
    assert smf["format"] == 1
    assert smf["ppq"] == DEFAULT_PPQ
    assert len(smf["tracks"]) == 4
    assert tempo_map(smf["tracks"][0]) == [(0, 500000)]
    for track in smf["tracks"][1:]:
        assert note_pairs(track) == []


def test_single_measure_geometry():
    beat = 500.0
    trace = make_trace(
        [resync_record(1000.0, beat, 4)],
        [
            note_record(1000.0, "pad", 48, 0.0, 2000.0),
            note_record(1000.0, "guitar", 60, 0.0, 500.0),
            note_record(1000.0, "guitar", 64, 500.0, 500.0),
            note_record(1000.0, "bass", 36, 0.0, 250.0, gain=2.0 / 3.0),
        ],
    )
    smf = parse_smf(export_midi(trace))
    ppq = smf["ppq"]
    pad, guitar, bass = (note_pairs(t) for t in smf["tracks"][1:])

    assert [p["pitch"] for p in pad] == [48]
    assert pad[0]["off"] - pad[0]["on"] == 4 * ppq  # whole measure
    assert [p["pitch"] for p in guitar] == [60, 64]
    assert guitar[1]["on"] - guitar[0]["on"] == ppq  # one beat apart
    assert bass[0]["off"] - bass[0]["on"] == ppq // 2
    assert pad[0]["velocity"] == 127
    assert bass[0]["velocity"] == round(2.0 / 3.0 * 127)
    # all three voices start together at the resync anchor
    assert pad[0]["on"] == guitar[0]["on"] == bass[0]["on"]


def test_program_changes_match_config():
    cfg = SessionConfig(program_pad=5, program_guitar=25, program_bass=34)
    trace = make_trace([], [], config=cfg)
    smf = parse_smf(export_midi(trace))
    programs = []
    for track in smf["tracks"][1:]:
        programs.extend(e["program"] for e in track if e.get("type") == "program")
    assert programs == [4, 24, 33]  # GM numbers are 1-based, bytes 0-based


def test_zero_gain_notes_are_omitted():
    trace = make_trace(
        [resync_record(0.0)],
        [
            note_record(0.0, "pad", 48, 0.0, 2000.0, gain=0.0),
            note_record(0.0, "guitar", 60, 0.0, 500.0, gain=0.5),
        ],
    )
    smf = parse_smf(export_midi(trace))
    assert note_pairs(smf["tracks"][1]) == []
    assert len(note_pairs(smf["tracks"][2])) == 1


def test_resync_truncates_sounding_notes():
    # second downbeat arrives 1200 ms in, cutting the 2000 ms pad short
    trace = make_trace(
        [resync_record(0.0), resync_record(1200.0)],
        [
            note_record(0.0, "pad", 48, 0.0, 2000.0),
            note_record(0.0, "guitar", 67, 1500.0, 500.0),  # never got to play
            note_record(1200.0, "pad", 50, 0.0, 2000.0),
        ],
    )
    smf = parse_smf(export_midi(trace))
    ppq = smf["ppq"]
    pad = sorted(note_pairs(smf["tracks"][1]), key=lambda p: p["on"])
    assert [p["pitch"] for p in pad] == [48, 50]
    first_len = pad[0]["off"] - pad[0]["on"]
    assert first_len == round(1200.0 / 500.0 * ppq)  # clipped at the boundary
    assert note_pairs(smf["tracks"][2]) == []


def test_tempo_map_follows_resyncs():
    trace = make_trace(
        [resync_record(0.0, 500.0, 4), resync_record(4000.0, 400.0, 3)],
        [],
    )
    smf = parse_smf(export_midi(trace))
    tempos = tempo_map(smf["tracks"][0])
    assert tempos[0] == (0, 500000)
    # 4000 ms at 500 ms/beat = 8 beats = 8 * ppq ticks
    assert tempos[1] == (8 * smf["ppq"], 400000)
    signatures = [
        (e["tick"], e["data"][0]) for e in smf["tracks"][0] if e.get("meta") == 0x58
    ]
    assert signatures == [(0, 4), (8 * smf["ppq"], 3)]


def test_real_replay_exports_cleanly():
    events, duration = metronome_log(
        bpm=120.0, duration_s=20.0, jitter_ms=10.0, players="echo", seed=5
    )
    trace = replay_events(events, duration, SessionConfig(warmup_ms=0.0)).trace()
    assert trace.notes
    smf = parse_smf(export_midi(trace))
    total = sum(len(note_pairs(t)) for t in smf["tracks"][1:])
    audible = [n for n in trace.notes if n["gain"] > 0.0]
    # clipping may drop late-measure notes but never invents new ones
    assert 0 < total <= len(audible)
    for track in smf["tracks"][1:]:
        ticks = [e["tick"] for e in track]
        assert ticks == sorted(ticks)
