"""Session orchestration: the time-ordered loop that ties listening,
scoring, and accompaniment together.

A Session consumes pad events and periodic analysis ticks in strictly
non-decreasing time order and produces two record streams: analysis
records (one per tick, plus one per resync) and note records (emitted at
each accompaniment measure start). Replaying a log file through
`replay_log` performs exactly the same sequence of calls, so a live
session and its replay serialize to identical traces.

Time rules:
  - analysis ticks land every compute_cadence_ms;
  - points are awarded whenever a tick crosses an award_cadence_ms
    boundary (award cadence is a multiple of the compute cadence);
  - the accompaniment is silent until the first resync, then wraps
    measure after measure until re-anchored by a matched hit;
  - during the first warmup_ms the output gain is capped at the
    level-1 gain, points are unaffected.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right, insort

from .config import SessionConfig
from .errors import DegenerateSignal, InsufficientData, SessionClosed
from .generator import (
    GeneratorState,
    make_generator_state,
    realize_measure,
    resync,
    on_measure_wrap,
    sync_check,
    volume_for_level,
)
from .logio import SessionTrace, parse_event_log
from .scoring import (
    InteractionFeatures,
    ScoreState,
    Thresholds,
    compute_clarity,
    compute_cross_corr,
    compute_density,
    interaction_level,
    push_level,
    smoothed_level,
    award_points,
)
from .signals import (
    BeatEstimate,
    PadEvent,
    average_signals,
    estimate_beat,
    estimate_meter_phase,
    gaussify,
    predict_next_measure,
)


class Session:
    """Stateful two-player session advancing in event/tick time."""

    def __init__(self, config: SessionConfig):
        config.validate()
        self.config = config
        self.events: dict[int, list[PadEvent]] = {1: [], 2: []}
        self.score = ScoreState(median_window=config.median_window)
        self.thresholds = Thresholds(
            clarity_min=config.clarity_min,
            density_min=config.density_min,
            cross_corr_min=config.cross_corr_min,
        )
        self.generator: GeneratorState = make_generator_state(config.rng_seed)
        self.estimate: BeatEstimate | None = None
        self.analysis_records: list[dict] = []
        self.note_records: list[dict] = []
        self._pending_notes: list[dict] = []
        self._next_award_ms = float(config.award_cadence_ms)
        self._last_seen_ms = 0.0
        self.closed = False

    # -- bookkeeping -------------------------------------------------

    def _check_open(self) -> None:
        if self.closed:
            raise SessionClosed("session is closed")

    def _advance_time(self, now_ms: float) -> None:
        # all inputs must arrive in non-decreasing global time
        if now_ms < self._last_seen_ms:
            raise ValueError(
                f"time went backwards: {now_ms} after {self._last_seen_ms}"
            )
        self._last_seen_ms = now_ms
        gen = self.generator
        while (
            gen.metronome_epoch_ms is not None
            and gen.metronome_epoch_ms + gen.measure_duration_ms <= now_ms
        ):
            boundary = gen.metronome_epoch_ms + gen.measure_duration_ms
            on_measure_wrap(gen)
            self._emit_measure(boundary)

    def _gain_at(self, at_ms: float) -> float:
        gain = volume_for_level(smoothed_level(self.score), self.config.gain_map)
        if at_ms < self.config.warmup_ms:
            gain = min(gain, self.config.gain_map[1])
        return gain

    def _emit_measure(self, start_ms: float) -> None:
        gen = self.generator
        plan = realize_measure(
            gen.chord, gen.meter, gen.beat_period_ms, self._gain_at(start_ms)
        )
        for note in plan.notes:
            record = {
                "kind": "note",
                "measure_ms": start_ms,
                "chord": gen.chord.name,
                "voice": note.voice,
                "pitch": note.pitch + self.config.transpose,
                "onset_ms": note.onset_ms,
                "duration_ms": note.duration_ms,
                "gain": note.gain,
            }
            self.note_records.append(record)
            self._pending_notes.append(record)

    # -- inputs ------------------------------------------------------

    def ingest(self, event: PadEvent) -> float | None:
        """Accept one pad hit; returns the matched prediction on resync."""
        self._check_open()
        self._advance_time(event.t_ms)
        self.events[event.player].append(event)
        gen = self.generator
        matched = sync_check(gen.predictions, event.t_ms, self.config.sync_window_ms)
        if matched is None or self.estimate is None:
            return None
        est = self.estimate
        resync(gen, event.t_ms, matched, est.beat_period_ms, est.meter)
        self.analysis_records.append(
            {
                "kind": "resync",
                "t_ms": float(event.t_ms),
                "player": event.player,
                "matched_prediction_ms": matched,
                "beat_period_ms": gen.beat_period_ms,
                "meter": gen.meter,
                "chord": gen.chord.name,
            }
        )
        self._emit_measure(float(event.t_ms))
        return matched

    def _window_signal(self, player: int, now_ms: float):
        cfg = self.config
        start = now_ms - cfg.window_ms
        times = [e.t_ms for e in self.events[player]]
        lo = bisect_right(times, start)
        hi = bisect_right(times, now_ms)
        window = self.events[player][lo:hi]
        return gaussify(
            window,
            sigma_ms=cfg.sigma_ms,
            start_ms=start,
            end_ms=now_ms,
            step_ms=cfg.grid_step_ms,
        )

    def analysis_tick(self, now_ms: float) -> dict:
        """Run one analysis pass at now_ms and return its tick record."""
        self._check_open()
        self._advance_time(now_ms)
        cfg = self.config
        sig1 = self._window_signal(1, now_ms)
        sig2 = self._window_signal(2, now_ms)
        combined = average_signals([sig1, sig2])

        record: dict = {
            "kind": "tick",
            "t_ms": float(now_ms),
            "beat_period_ms": None,
            "meter": None,
            "phase_ms": None,
            "next_measure_ms": None,
            "clarity": None,
            "density_1": None,
            "density_2": None,
            "cross_corr": None,
            "raw_level": 0,
        }
        try:
            beat = estimate_beat(
                combined,
                min_period_ms=cfg.min_period_ms,
                max_period_ms=cfg.max_period_ms,
                sigma_ms=cfg.sigma_ms,
                prior_center_ms=cfg.tempo_prior_center_ms,
                prior_log_sigma=cfg.tempo_prior_log_sigma,
                min_mass_events=cfg.min_mass_events,
            )
            meter, phase = estimate_meter_phase(combined, beat, sigma_ms=cfg.sigma_ms)
            clarity = compute_clarity(combined, beat)
        except (InsufficientData, DegenerateSignal):
            pass
        else:
            measure_ms = meter * beat
            density_1 = compute_density(
                [e.t_ms for e in self.events[1]], now_ms, cfg.density_window_ms
            )
            density_2 = compute_density(
                [e.t_ms for e in self.events[2]], now_ms, cfg.density_window_ms
            )
            cross = compute_cross_corr(sig1, sig2, measure_ms)
            features = InteractionFeatures(
                clarity=clarity,
                density_1=density_1,
                density_2=density_2,
                cross_corr=cross,
            )
            raw = interaction_level(features, self.thresholds)
            prediction = predict_next_measure(phase, measure_ms, now_ms)
            self.estimate = BeatEstimate(
                beat_period_ms=beat, meter=meter, phase_ms=phase, clarity=clarity
            )
            preds = self.generator.predictions
            if prediction not in preds:
                insort(preds, prediction)
            record.update(
                beat_period_ms=beat,
                meter=meter,
                phase_ms=phase,
                next_measure_ms=prediction,
                clarity=clarity,
                density_1=density_1,
                density_2=density_2,
                cross_corr=cross,
                raw_level=raw,
            )

        # drop predictions too old to ever match
        stale = now_ms - cfg.sync_window_ms
        preds = self.generator.predictions
        lo = bisect_left(preds, stale)
        if lo:
            del preds[:lo]

        record["level"] = push_level(self.score, record["raw_level"])
        while now_ms >= self._next_award_ms:
            award_points(self.score, cfg.point_weights)
            self._next_award_ms += cfg.award_cadence_ms
        record["points"] = self.score.points
        self.analysis_records.append(record)
        return record

    # -- outputs -----------------------------------------------------

    def drain_notes(self) -> list[dict]:
        """Return and clear notes emitted since the previous drain."""
        out = self._pending_notes
        self._pending_notes = []
        return out

    def snapshot(self, now_ms: float) -> dict:
        est = self.estimate
        gen = self.generator
        next_downbeat_ms = None
        if gen.metronome_epoch_ms is not None:
            next_downbeat_ms = gen.metronome_epoch_ms + gen.measure_duration_ms
        else:
            upcoming = gen.predictions[bisect_right(gen.predictions, now_ms):]
            if upcoming:
                next_downbeat_ms = upcoming[0]
        return {
            "t_ms": float(now_ms),
            "level": smoothed_level(self.score),
            "points": self.score.points,
            "bpm": None if est is None else est.bpm,
            "meter": None if est is None else est.meter,
            "clarity": None if est is None else est.clarity,
            "accompaniment_on": gen.metronome_epoch_ms is not None,
            "next_downbeat_ms": next_downbeat_ms,
        }

    def close(self) -> None:
        self.closed = True

    def trace(self) -> SessionTrace:
        return SessionTrace(
            config=self.config.to_dict(),
            analysis=list(self.analysis_records),
            notes=list(self.note_records),
        )


def replay_events(
    events: list[PadEvent], duration_ms: int, config: SessionConfig
) -> Session:
    """Drive a fresh Session through a recorded event list.

    Events are interleaved with analysis ticks in global time order; an
    event stamped exactly on a tick boundary is ingested before that
    tick runs. The result is deterministic for a given (log, config).
    """
    session = Session(config)
    ordered = sorted(events, key=lambda e: e.t_ms)
    cadence = config.compute_cadence_ms
    i = 0
    t = cadence
    while t <= duration_ms:
        while i < len(ordered) and ordered[i].t_ms <= t:
            session.ingest(ordered[i])
            i += 1
        session.analysis_tick(t)
        t += cadence
    while i < len(ordered) and ordered[i].t_ms <= duration_ms:
        session.ingest(ordered[i])
        i += 1
    session.close()
    return session


def replay_log(text: str, config: SessionConfig) -> SessionTrace:
    events, duration_ms = parse_event_log(text)
    return replay_events(events, duration_ms, config).trace()


def summarize_trace(trace: SessionTrace) -> dict:
    """Human-oriented digest of a trace: score, levels, tempo timeline."""
    ticks = [r for r in trace.analysis if r["kind"] == "tick"]
    clarities = [r["clarity"] for r in ticks if r["clarity"] is not None]
    histogram = {str(level): 0 for level in range(4)}
    for rec in ticks:
        histogram[str(rec["level"])] += 1
    return {
        "ticks": len(ticks),
        "mean_clarity": sum(clarities) / len(clarities) if clarities else None,
        "level_histogram": histogram,
        "final_points": ticks[-1]["points"] if ticks else 0,
        "bpm_timeline": [
            (rec["t_ms"], round(60000.0 / rec["beat_period_ms"], 3))
            for rec in ticks
            if rec["beat_period_ms"]
        ],
        "notes": len(trace.notes),
        "resyncs": sum(1 for r in trace.analysis if r["kind"] == "resync"),
    }
