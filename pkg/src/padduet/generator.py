"""Markov-chain accompaniment: chords, voicings, and the sync metronome.

Accompaniment is one chord per measure, drawn from a first-order Markov
chain over the six diatonic triads of C major. Each measure is realized
as three voices: a pad holding the chord root for the whole measure, a
guitar arpeggio placing one chord tone per beat, and a bass alternating
root and fifth every half beat. Note loudness is a gain in [0, 1]
proportional to the interaction level, so better playing literally earns
more music.

The generator's internal metronome is not free-running: whenever a pad
hit lands within the sync window of a predicted downbeat, the metronome
epoch snaps to that hit and tempo/meter are re-adopted from the current
beat estimate. The chord is redrawn on every resync and on every
measure wrap.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .errors import UnsupportedMeter

VOICES = ("pad", "guitar", "bass")

# Octave anchors per voice (MIDI note of the octave's C).
PAD_BASE = 48
GUITAR_BASE = 60
BASS_BASE = 36

DEFAULT_GAIN_MAP = (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)
SYNC_WINDOW_MS = 50.0


@dataclass(frozen=True)
class Chord:
    name: str
    pitch_classes: tuple[int, int, int]  # root, third, fifth

    @property
    def root(self) -> int:
        return self.pitch_classes[0]


CHORDS = (
    Chord("C", (0, 4, 7)),
    Chord("Dm", (2, 5, 9)),
    Chord("Em", (4, 7, 11)),
    Chord("F", (5, 9, 0)),
    Chord("G", (7, 11, 2)),
    Chord("Am", (9, 0, 4)),
)

_SIXTH = Fraction(1, 6)
_THIRD = Fraction(1, 3)
_HALF = Fraction(1, 2)

# Row i gives the successor distribution of CHORDS[i]; rows sum to 1.
TRANSITIONS: tuple[tuple[Fraction, ...], ...] = (
    (_SIXTH, _SIXTH, _SIXTH, _SIXTH, _SIXTH, _SIXTH),  # C
    (_THIRD, 0, _THIRD, 0, _THIRD, 0),  # Dm
    (_THIRD, 0, 0, _THIRD, 0, _THIRD),  # Em
    (_THIRD, _THIRD, 0, 0, _THIRD, 0),  # F
    (_THIRD, 0, _THIRD, 0, 0, _THIRD),  # G
    (0, _HALF, 0, _HALF, 0, 0),  # Am
)

_CUMULATIVE = tuple(
    tuple(float(sum(row[: j + 1])) for j in range(len(row))) for row in TRANSITIONS
)


@dataclass(frozen=True)
class GeneratedNote:
    """One note of a realized measure; onset is relative to measure start."""

    voice: str
    pitch: int
    onset_ms: float
    duration_ms: float
    gain: float


@dataclass(frozen=True)
class MeasurePlan:
    chord: Chord
    meter: int
    beat_period_ms: float
    notes: tuple[GeneratedNote, ...]

    @property
    def measure_duration_ms(self) -> float:
        return self.beat_period_ms * self.meter


@dataclass
class GeneratorState:
    """Everything the accompaniment side remembers between events."""

    rng: np.random.Generator
    chord_index: int = 0  # start on the tonic
    beat_period_ms: float = 500.0
    meter: int = 4
    metronome_epoch_ms: float | None = None  # None until the first resync
    predictions: list[float] = field(default_factory=list)

    @property
    def chord(self) -> Chord:
        return CHORDS[self.chord_index]

    @property
    def measure_duration_ms(self) -> float:
        return self.beat_period_ms * self.meter


def make_generator_state(seed: int) -> GeneratorState:
    return GeneratorState(rng=np.random.default_rng(seed))


def next_chord(state: GeneratorState) -> Chord:
    """Advance the chord chain one step and return the new chord.

    Sampling inverts the cumulative distribution of the current row, so
    zero-probability successors are structurally unreachable.
    """
    u = float(state.rng.random())
    cum = _CUMULATIVE[state.chord_index]
    state.chord_index = bisect.bisect_right(cum, u)
    if state.chord_index >= len(CHORDS):  # u landed on the final boundary
        state.chord_index = len(CHORDS) - 1
    return CHORDS[state.chord_index]


def _voice_pitches(chord: Chord, base: int) -> tuple[int, int, int, int]:
    """Root, third, fifth, octave-root stacked upward from an octave anchor."""
    root_pc, third_pc, fifth_pc = chord.pitch_classes
    root = base + root_pc
    third = root + (third_pc - root_pc) % 12
    fifth = root + (fifth_pc - root_pc) % 12
    return root, third, fifth, root + 12


def realize_measure(
    chord: Chord, meter: int, beat_period_ms: float, gain: float
) -> MeasurePlan:
    """Lay out one measure of pad, guitar, and bass notes.

    Pad: a single chord-root note spanning the measure. Guitar: one note
    per beat cycling root, third, fifth, octave root. Bass: two notes per
    beat alternating root and fifth, starting on the root.
    """
    if meter not in (2, 3, 4):
        raise UnsupportedMeter(f"meter must be 2, 3, or 4, got {meter}")
    if beat_period_ms <= 0:
        raise ValueError(f"beat_period_ms must be positive, got {beat_period_ms}")
    measure = meter * beat_period_ms
    notes: list[GeneratedNote] = []

    pad_root = _voice_pitches(chord, PAD_BASE)[0]
    notes.append(GeneratedNote("pad", pad_root, 0.0, measure, gain))

    arpeggio = _voice_pitches(chord, GUITAR_BASE)
    for k in range(meter):
        notes.append(
            GeneratedNote("guitar", arpeggio[k % 4], k * beat_period_ms, beat_period_ms, gain)
        )

    b_root, _, b_fifth, _ = _voice_pitches(chord, BASS_BASE)
    half = beat_period_ms / 2.0
    for k in range(2 * meter):
        pitch = b_root if k % 2 == 0 else b_fifth
        notes.append(GeneratedNote("bass", pitch, k * half, half, gain))

    return MeasurePlan(chord=chord, meter=meter, beat_period_ms=beat_period_ms, notes=tuple(notes))


def volume_for_level(level: int, gain_map: tuple[float, ...] = DEFAULT_GAIN_MAP) -> float:
    """Output gain for a smoothed interaction level."""
    return gain_map[level]


def sync_check(
    predictions: list[float], hit_at_ms: float, window_ms: float = SYNC_WINDOW_MS
) -> float | None:
    """Return the predicted downbeat this hit confirms, if any.

    Picks the prediction minimizing |hit - prediction|; a tie goes to the
    earlier prediction. Hits farther than window_ms from everything
    return None.
    """
    best: float | None = None
    best_dist = window_ms
    for p in predictions:
        dist = abs(hit_at_ms - p)
        if dist < best_dist or (dist == best_dist and best is None):
            best, best_dist = p, dist
    return best


def resync(
    state: GeneratorState,
    hit_at_ms: float,
    matched_prediction_ms: float,
    beat_period_ms: float,
    meter: int,
) -> Chord:
    """Snap the metronome to a confirming hit and redraw the chord.

    The epoch becomes the hit time itself (the player, not the model, is
    the authority on where the downbeat fell), tempo and meter are
    re-adopted from the current estimate, and the matched prediction plus
    everything before it is consumed so one downbeat triggers at most one
    resync.
    """
    state.metronome_epoch_ms = hit_at_ms
    state.beat_period_ms = beat_period_ms
    state.meter = meter
    state.predictions = [p for p in state.predictions if p > matched_prediction_ms]
    return next_chord(state)


def on_measure_wrap(state: GeneratorState) -> Chord:
    """Advance the metronome one full measure and redraw the chord."""
    if state.metronome_epoch_ms is None:
        raise ValueError("measure wrap before the metronome was started")
    state.metronome_epoch_ms += state.measure_duration_ms
    return next_chord(state)


def chord_distribution(chord_index: int) -> tuple[Fraction, ...]:
    """Exact successor distribution for one chord (for tests and docs)."""
    return TRANSITIONS[chord_index]
