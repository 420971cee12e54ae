"""Calibration battery: mode separations and the packaged snapshot."""

import json
from importlib import resources

import pytest

from padduet.calibrate import calibration_overlay, run_battery
from padduet.config import SessionConfig, calibrated_defaults
from padduet.session import replay_events
from padduet.synthlog import metronome_log


@pytest.fixture(scope="module")
def report():
    return run_battery()


def test_cross_corr_ordering(report):
    assert (
        report.echo.cross_corr_mean
        > report.lockstep.cross_corr_mean
        > report.independent.cross_corr_mean
    )


def test_clarity_straddles_the_gate(report):
    assert report.lockstep.clarity_mean > 0.4 > report.independent.clarity_mean
    assert report.orderings_hold(0.4)


def test_every_mode_contributed_ticks(report):
    for stats in (report.lockstep, report.echo, report.independent):
        assert stats.ticks >= 100


def test_suggested_threshold_sits_between_modes(report):
    assert (
        report.lockstep.cross_corr_mean
        < report.suggested_cross_corr_min
        < report.echo.cross_corr_mean
    )


def test_packaged_snapshot_is_current(report):
    """The shipped calibration file must match a fresh battery run."""
    text = resources.files("padduet").joinpath("data/calibrated.json").read_text()
    assert json.loads(text) == calibration_overlay(report)


def test_calibrated_defaults_load(report):
    cfg = calibrated_defaults()
    assert cfg.cross_corr_min == report.suggested_cross_corr_min
    assert cfg.sigma_ms == SessionConfig().sigma_ms


def test_calibrated_threshold_separates_scenarios(report):
    """At the canonical tempo the calibrated gate tells the modes apart."""
    cfg = SessionConfig(cross_corr_min=report.suggested_cross_corr_min)
    echo_events, duration = metronome_log(
        bpm=120.0, duration_s=20.0, jitter_ms=10.0, players="echo", seed=202
    )
    echo = replay_events(echo_events, duration, cfg).trace()
    echo_ticks = [r for r in echo.analysis if r["kind"] == "tick" and r["t_ms"] > 5000]
    assert any(t["raw_level"] == 3 for t in echo_ticks)
    assert max(t["level"] for t in echo_ticks) == 3

    lock_events, duration = metronome_log(
        bpm=120.0, duration_s=20.0, jitter_ms=10.0, players="two", seed=102
    )
    lock = replay_events(lock_events, duration, cfg).trace()
    lock_ticks = [r for r in lock.analysis if r["kind"] == "tick" and r["t_ms"] >= 10000]
    assert lock_ticks and all(t["level"] >= 2 for t in lock_ticks)
