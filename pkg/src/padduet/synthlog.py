"""Synthetic event-log generation: metronome duets, echo improvisation,
and independent-random playing.

These generators produce the padlog inputs used by the metronome CLI
command, the calibration battery, and the test suite. All randomness
flows from one seeded generator per call, so a (parameters, seed) pair
always yields the same log.

Echo mode is the imitation scenario: player 1 improvises a fresh pattern
every measure on the half-beat grid (downbeat always present and
accented), and player 2 repeats player 1's previous measure verbatim,
one measure late. The battery constants below are versioned with the
calibration procedure; changing them changes what the suggested
cross-correlation threshold means.
"""

from __future__ import annotations

import numpy as np

from .signals import PadEvent

PLAYER_MODES = ("one", "two", "echo")

# Echo improvisation battery constants (v1). Velocities run hot on
# purpose: the measure-lagged similarity rewards echoed mass linearly
# but chance slot overlap only quadratically in the fill rate, so loud
# dense echoes are what separates imitation from mere synchrony.
ECHO_DOWNBEAT_VELOCITY = 127
ECHO_BEAT_VELOCITY = 100
ECHO_OFFBEAT_VELOCITY = 80
ECHO_BEAT_FILL = 0.85
ECHO_OFFBEAT_FILL = 0.65

DEFAULT_VELOCITY = 100

# independent-play rate used by the calibration battery
RANDOM_RATE_HZ = 1.2


def _jittered(base_ms: float, rng: np.random.Generator, jitter_ms: float) -> int:
    t = base_ms if jitter_ms <= 0 else base_ms + rng.normal(0.0, jitter_ms)
    return max(0, int(round(t)))


def _finalize(events: list[PadEvent], duration_ms: int) -> list[PadEvent]:
    events.sort(key=lambda e: (e.t_ms, e.player))
    return [e for e in events if e.t_ms < duration_ms]


def metronome_log(
    *,
    bpm: float,
    duration_s: float,
    jitter_ms: float = 0.0,
    meter: int = 4,
    accent: tuple[int, ...] | None = None,
    players: str = "two",
    seed: int = 0,
) -> tuple[list[PadEvent], int]:
    """Synthesize a metronome-style duet log.

    players "one": only player 1 hits each beat. "two": both players hit
    each beat in lockstep. "echo": the imitation scenario described in
    the module docstring (accent is ignored there; the improvisation
    carries its own velocities).
    """
    if players not in PLAYER_MODES:
        raise ValueError(f"players must be one of {PLAYER_MODES}, got {players!r}")
    if not 40.0 <= bpm <= 240.0:
        raise ValueError(f"bpm must be in [40, 240], got {bpm}")
    if meter not in (2, 3, 4):
        raise ValueError(f"meter must be 2, 3, or 4, got {meter}")
    if duration_s <= 0:
        raise ValueError(f"duration_s must be positive, got {duration_s}")
    rng = np.random.default_rng(seed)
    beat_ms = 60000.0 / bpm
    duration_ms = int(round(duration_s * 1000.0))
    if players == "echo":
        return _echo_log(rng, beat_ms, meter, duration_ms, jitter_ms), duration_ms

    pattern = accent if accent else (DEFAULT_VELOCITY,) * meter
    if len(pattern) != meter or any(not 1 <= v <= 127 for v in pattern):
        raise ValueError(f"accent must give {meter} velocities in 1..127")
    events: list[PadEvent] = []
    active = (1,) if players == "one" else (1, 2)
    idx = 0
    t = 0.0
    while t < duration_ms:
        velocity = pattern[idx % meter]
        for player in active:
            events.append(PadEvent(_jittered(t, rng, jitter_ms), player, velocity))
        idx += 1
        t += beat_ms
    return _finalize(events, duration_ms), duration_ms


def _echo_log(
    rng: np.random.Generator,
    beat_ms: float,
    meter: int,
    duration_ms: int,
    jitter_ms: float,
) -> list[PadEvent]:
    measure_ms = meter * beat_ms
    half = beat_ms / 2.0
    slots = 2 * meter
    n_measures = int(np.ceil(duration_ms / measure_ms))

    patterns = []
    for _ in range(n_measures):
        fill = rng.random(slots)
        keep = np.zeros(slots, dtype=bool)
        keep[0] = True  # the downbeat anchors every measure
        keep[2::2] = fill[2::2] < ECHO_BEAT_FILL
        keep[1::2] = fill[1::2] < ECHO_OFFBEAT_FILL
        patterns.append(keep)

    def velocity_for(slot: int) -> int:
        if slot == 0:
            return ECHO_DOWNBEAT_VELOCITY
        return ECHO_BEAT_VELOCITY if slot % 2 == 0 else ECHO_OFFBEAT_VELOCITY

    events: list[PadEvent] = []
    for k, pattern in enumerate(patterns):
        base = k * measure_ms
        for slot in range(slots):
            if pattern[slot]:
                events.append(
                    PadEvent(_jittered(base + slot * half, rng, jitter_ms), 1, velocity_for(slot))
                )
    # player 2 replays measure k-1 during measure k
    for k in range(1, n_measures):
        base = k * measure_ms
        for slot in range(slots):
            if patterns[k - 1][slot]:
                events.append(
                    PadEvent(_jittered(base + slot * half, rng, jitter_ms), 2, velocity_for(slot))
                )
    return _finalize(events, duration_ms)


def random_duet_log(
    *,
    rate_hz: float = RANDOM_RATE_HZ,
    duration_s: float = 20.0,
    seed: int = 0,
    velocity: int = DEFAULT_VELOCITY,
) -> tuple[list[PadEvent], int]:
    """Two independent Poisson streams: playing with no shared pulse."""
    if rate_hz <= 0 or duration_s <= 0:
        raise ValueError("rate_hz and duration_s must be positive")
    rng = np.random.default_rng(seed)
    duration_ms = int(round(duration_s * 1000.0))
    events: list[PadEvent] = []
    for player in (1, 2):
        count = rng.poisson(rate_hz * duration_s)
        times = np.sort(rng.uniform(0.0, duration_ms, count))
        events.extend(PadEvent(int(t), player, velocity) for t in times)
    return _finalize(events, duration_ms), duration_ms


def silence_log(duration_s: float) -> tuple[list[PadEvent], int]:
    return [], int(round(duration_s * 1000.0))
