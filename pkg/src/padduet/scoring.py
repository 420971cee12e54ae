"""Interaction quality: from signal features to a 0-3 level and points.

The scorer grades each analysis window on a four-step ladder:

  0  no shared pulse (beat clarity below threshold)
  1  a pulse exists but only one player is really participating
  2  both players active on a shared pulse
  3  the players imitate each other measure-by-measure

Clarity is the signal's self-similarity one beat apart; density is each
player's hit rate over the recent past; the imitation test correlates
the two players' signals one measure apart, in both directions. Raw
levels are noisy, so the published level is a running median, and points
accrue once per award tick weighted by the current smoothed level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DegenerateSignal
from .signals import GaussifiedSignal, correlate, shift

DEFAULT_POINT_WEIGHTS = (0, 1, 2, 3)


@dataclass(frozen=True)
class Thresholds:
    """Decision constants for the level ladder."""

    clarity_min: float = 0.4
    density_min: float = 0.5
    cross_corr_min: float = 15.0


@dataclass(frozen=True)
class InteractionFeatures:
    """Inputs to the level decision, all non-negative."""

    clarity: float
    density_1: float
    density_2: float
    cross_corr: float


@dataclass
class ScoreState:
    """Rolling level history and the shared point total."""

    median_window: int = 15
    history: list[int] = field(default_factory=list)
    points: int = 0


def compute_clarity(sig: GaussifiedSignal, beat_period_ms: float) -> float:
    """Self-similarity of the signal one beat apart, in [0, 1].

    Ratio of the correlation at the beat lag to the zero-lag energy; a
    perfectly periodic signal scores just under 1, uncorrelated hits
    score near 0. Raises DegenerateSignal on an identically zero signal.
    """
    denom = correlate(sig, sig, 0.0)
    if denom <= 0.0:
        raise DegenerateSignal("zero-energy signal has no clarity")
    value = correlate(sig, shift(sig, beat_period_ms), 0.0) / denom
    return min(1.0, max(0.0, value))


def compute_density(timestamps_ms: list[int], now_ms: float, window_ms: float = 10000.0) -> float:
    """Hits per second over the trailing window (strictly after now - window)."""
    cutoff = now_ms - window_ms
    count = sum(1 for t in timestamps_ms if t > cutoff)
    return count / (window_ms / 1000.0)


def compute_cross_corr(
    sig_1: GaussifiedSignal, sig_2: GaussifiedSignal, measure_duration_ms: float
) -> float:
    """Measure-lagged similarity of the two players, symmetric by construction.

    Averages the correlation of each signal against the other shifted one
    measure later, so it is high when either player repeats what the
    other played one measure ago. Unnormalized (amplitude^2 * ms).
    """
    forward = correlate(sig_1, shift(sig_2, measure_duration_ms), 0.0)
    backward = correlate(sig_2, shift(sig_1, measure_duration_ms), 0.0)
    return (forward + backward) / 2.0


def interaction_level(features: InteractionFeatures, thresholds: Thresholds) -> int:
    """The four-way level decision, a strict threshold cascade."""
    if features.clarity < thresholds.clarity_min:
        return 0
    if features.density_1 < thresholds.density_min or features.density_2 < thresholds.density_min:
        return 1
    if features.cross_corr < thresholds.cross_corr_min:
        return 2
    return 3


def smoothed_level(state: ScoreState) -> int:
    """Current published level: lower median of the recent raw levels."""
    if not state.history:
        return 0
    ordered = sorted(state.history)
    return ordered[(len(ordered) - 1) // 2]


def push_level(state: ScoreState, raw_level: int) -> int:
    """Record a raw level and return the updated smoothed level.

    The history keeps only the last median_window entries, so a burst of
    outliers shorter than half the window cannot move the median.
    """
    if raw_level not in (0, 1, 2, 3):
        raise ValueError(f"raw_level must be 0..3, got {raw_level}")
    state.history.append(raw_level)
    if len(state.history) > state.median_window:
        del state.history[: len(state.history) - state.median_window]
    return smoothed_level(state)


def award_points(state: ScoreState, weights: tuple[int, ...] = DEFAULT_POINT_WEIGHTS) -> int:
    """Add the current smoothed level's weight to the shared total."""
    state.points += weights[smoothed_level(state)]
    return state.points
