"""Threshold calibration from synthetic play batteries.

The interaction-level ladder needs a cross-correlation threshold that
separates imitative play (one player echoing the other a measure later)
from mere synchrony (both drumming the same beat). That boundary lives
in signal units, so it depends on the gaussification constants; this
module replays a fixed battery of synthetic duets through the real
analysis pipeline and places the threshold midway between the echo and
lockstep means.

The battery is versioned: its seeds, tempi, and the echo velocity
constants in synthlog are part of what a calibrated threshold means.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from .config import SessionConfig
from .session import replay_events
from .synthlog import RANDOM_RATE_HZ, metronome_log, random_duet_log

BATTERY_VERSION = 1
BATTERY_TEMPI = (60.0, 90.0, 120.0, 150.0, 180.0)
BATTERY_DURATION_S = 20.0
BATTERY_JITTER_MS = 10.0
LOCKSTEP_SEED_BASE = 100
ECHO_SEED_BASE = 200
RANDOM_SEED_BASE = 300


@dataclass(frozen=True)
class ModeStats:
    """Post-warm-up feature averages for one battery mode."""

    ticks: int
    clarity_mean: float
    cross_corr_mean: float


@dataclass(frozen=True)
class CalibrationReport:
    lockstep: ModeStats
    echo: ModeStats
    independent: ModeStats
    suggested_cross_corr_min: float
    battery_version: int = BATTERY_VERSION

    def orderings_hold(self, clarity_min: float) -> bool:
        """The separations calibration exists to guarantee."""
        return (
            self.echo.cross_corr_mean
            > self.lockstep.cross_corr_mean
            > self.independent.cross_corr_mean
            and self.lockstep.clarity_mean > clarity_min > self.independent.clarity_mean
        )

    def to_dict(self) -> dict:
        return asdict(self)


def _collect_features(trace, warmup_ms: float) -> list[tuple[float, float]]:
    return [
        (rec["clarity"], rec["cross_corr"])
        for rec in trace.analysis
        if rec["kind"] == "tick"
        and rec["t_ms"] > warmup_ms
        and rec["clarity"] is not None
    ]


def _stats(features: list[tuple[float, float]]) -> ModeStats:
    if not features:
        return ModeStats(ticks=0, clarity_mean=0.0, cross_corr_mean=0.0)
    n = len(features)
    return ModeStats(
        ticks=n,
        clarity_mean=sum(f[0] for f in features) / n,
        cross_corr_mean=sum(f[1] for f in features) / n,
    )


def run_battery(config: SessionConfig | None = None) -> CalibrationReport:
    """Replay the full battery and report per-mode feature means.

    The features feeding the report do not depend on the thresholds in
    the supplied config, only on its signal constants, so calibrating
    from an uncalibrated config is sound.
    """
    cfg = (config or SessionConfig()).validate()

    def metronome_features(players: str, seed_base: int):
        feats: list[tuple[float, float]] = []
        for i, bpm in enumerate(BATTERY_TEMPI):
            events, duration = metronome_log(
                bpm=bpm,
                duration_s=BATTERY_DURATION_S,
                jitter_ms=BATTERY_JITTER_MS,
                players=players,
                seed=seed_base + i,
            )
            trace = replay_events(events, duration, cfg).trace()
            feats.extend(_collect_features(trace, cfg.warmup_ms))
        return feats

    lockstep = _stats(metronome_features("two", LOCKSTEP_SEED_BASE))
    echo = _stats(metronome_features("echo", ECHO_SEED_BASE))

    random_feats: list[tuple[float, float]] = []
    for i in range(len(BATTERY_TEMPI)):
        events, duration = random_duet_log(
            rate_hz=RANDOM_RATE_HZ,
            duration_s=BATTERY_DURATION_S,
            seed=RANDOM_SEED_BASE + i,
        )
        trace = replay_events(events, duration, cfg).trace()
        random_feats.extend(_collect_features(trace, cfg.warmup_ms))
    independent = _stats(random_feats)

    midpoint = (echo.cross_corr_mean + lockstep.cross_corr_mean) / 2.0
    return CalibrationReport(
        lockstep=lockstep,
        echo=echo,
        independent=independent,
        suggested_cross_corr_min=round(midpoint, 3),
    )


def calibration_overlay(report: CalibrationReport) -> dict:
    """The config-file fragment a calibration run produces."""
    return {"cross_corr_min": report.suggested_cross_corr_min}


def write_snapshot(path: str, report: CalibrationReport) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(calibration_overlay(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
