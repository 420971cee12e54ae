"""Onset-stream signal mathematics for beat, meter, and phase inference.

The analysis pipeline turns timestamped, velocity-weighted pad hits into
a smooth non-negative function of time: each hit contributes a Gaussian
bump centered on its onset, scaled by velocity/127. Periodic playing
then shows up as peaks in the autocorrelation of that function, and the
lag of the best perceptually-weighted peak is the beat period. Meter and
downbeat phase come from correlating the signal against accented
prototype pulse trains (downbeat twice the weight of other beats) for
each candidate meter. The next measure start is extrapolated from the
winning phase.

Everything here is pure: no clocks, no shared state, milliseconds
throughout. Correlations are unnormalized sums times the grid step, so
their unit is amplitude^2 * ms and values grow with signal mass; ratios
of correlations (clarity, meter scores) are dimensionless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, InsufficientData, InvalidGrid

# Contribution beyond 4 sigma is below 3.4e-4 of peak; cutting it there
# bounds the per-event cost of gaussification.
TRUNCATION_SIGMAS = 4.0

# Meters the prototype search considers, in tie-preference order.
SUPPORTED_METERS = (4, 3, 2)

# Relative score band inside which meter candidates count as tied. Exact
# float ties never happen; a uniform unaccented train scores all meters
# within a fraction of a percent of each other, and the tie rule must
# fire there.
METER_TIE_TOL = 0.01

# Weight of non-downbeat pulses in the meter prototypes (downbeat = 1.0).
OFFBEAT_WEIGHT = 0.5


@dataclass(frozen=True)
class PadEvent:
    """One pad hit: session-relative time, player number, MIDI velocity."""

    t_ms: int
    player: int
    velocity: int

    def __post_init__(self) -> None:
        if self.t_ms < 0:
            raise ValueError(f"t_ms must be >= 0, got {self.t_ms}")
        if self.player not in (1, 2):
            raise ValueError(f"player must be 1 or 2, got {self.player}")
        if not 1 <= self.velocity <= 127:
            raise ValueError(f"velocity must be in 1..127, got {self.velocity}")

    @property
    def weight(self) -> float:
        return self.velocity / 127.0


@dataclass
class GaussifiedSignal:
    """A sampled continuous signal on a regular time grid.

    samples[k] is the signal value at start_ms + k * step_ms.
    """

    start_ms: float
    step_ms: float
    samples: np.ndarray

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def end_ms(self) -> float:
        return self.start_ms + (len(self.samples) - 1) * self.step_ms

    def same_grid(self, other: "GaussifiedSignal") -> bool:
        return (
            self.start_ms == other.start_ms
            and self.step_ms == other.step_ms
            and len(self.samples) == len(other.samples)
        )


@dataclass(frozen=True)
class BeatEstimate:
    """Everything one analysis pass inferred about the shared pulse."""

    beat_period_ms: float
    meter: int
    phase_ms: float  # absolute session time of a downbeat
    clarity: float

    @property
    def measure_duration_ms(self) -> float:
        return self.beat_period_ms * self.meter

    @property
    def bpm(self) -> float:
        return 60000.0 / self.beat_period_ms


def _check_grid(start_ms: float, end_ms: float, step_ms: float) -> int:
    if not (step_ms > 0 and math.isfinite(step_ms)):
        raise InvalidGrid(f"step_ms must be positive and finite, got {step_ms}")
    if not (math.isfinite(start_ms) and math.isfinite(end_ms)):
        raise InvalidGrid("grid bounds must be finite")
    if end_ms < start_ms:
        raise InvalidGrid(f"end_ms {end_ms} precedes start_ms {start_ms}")
    return int(math.floor((end_ms - start_ms) / step_ms + 1e-9)) + 1


def _require_same_grid(a: GaussifiedSignal, b: GaussifiedSignal) -> None:
    if not a.same_grid(b):
        raise GridMismatch(
            f"grids differ: ({a.start_ms}, {a.step_ms}, {len(a)}) "
            f"vs ({b.start_ms}, {b.step_ms}, {len(b)})"
        )


def gaussify_weighted(
    times_ms: np.ndarray,
    weights: np.ndarray,
    *,
    sigma_ms: float,
    start_ms: float,
    end_ms: float,
    step_ms: float,
) -> GaussifiedSignal:
    """Sum truncated Gaussians of the given weights onto a sample grid.

    Each impulse at time t with weight w adds w * exp(-(t_k - t)^2 /
    (2 sigma^2)) to every grid sample t_k within TRUNCATION_SIGMAS * sigma
    of t. Impulses too far outside the grid therefore contribute nothing.
    """
    if sigma_ms <= 0:
        raise InvalidGrid(f"sigma_ms must be positive, got {sigma_ms}")
    n = _check_grid(start_ms, end_ms, step_ms)
    samples = np.zeros(n, dtype=np.float64)
    reach = TRUNCATION_SIGMAS * sigma_ms
    denom = 2.0 * sigma_ms * sigma_ms
    for t, w in zip(times_ms, weights):
        k_lo = max(0, int(math.ceil((t - reach - start_ms) / step_ms - 1e-9)))
        k_hi = min(n - 1, int(math.floor((t + reach - start_ms) / step_ms + 1e-9)))
        if k_lo > k_hi:
            continue
        grid = start_ms + step_ms * np.arange(k_lo, k_hi + 1)
        samples[k_lo : k_hi + 1] += w * np.exp(-((grid - t) ** 2) / denom)
    return GaussifiedSignal(start_ms=float(start_ms), step_ms=float(step_ms), samples=samples)


def gaussify(
    events: list[PadEvent],
    *,
    sigma_ms: float,
    start_ms: float,
    end_ms: float,
    step_ms: float,
) -> GaussifiedSignal:
    """Gaussify pad events, weighting each hit by velocity / 127."""
    times = np.array([e.t_ms for e in events], dtype=np.float64)
    weights = np.array([e.weight for e in events], dtype=np.float64)
    return gaussify_weighted(
        times, weights, sigma_ms=sigma_ms, start_ms=start_ms, end_ms=end_ms, step_ms=step_ms
    )


def correlate(a: GaussifiedSignal, b: GaussifiedSignal, lag_ms: float) -> float:
    """Unnormalized correlation of two signals at a time lag.

    Sums a[k] * b[k + round(lag/step)] * step over the overlapping range,
    so the result's unit is amplitude^2 * ms. Positive lag compares a
    against a later portion of b.
    """
    _require_same_grid(a, b)
    n = len(a)
    off = int(round(lag_ms / a.step_ms))
    if abs(off) >= n:
        return 0.0
    if off >= 0:
        dot = float(np.dot(a.samples[: n - off], b.samples[off:]))
    else:
        dot = float(np.dot(a.samples[-off:], b.samples[: n + off]))
    return dot * a.step_ms


def shift(sig: GaussifiedSignal, offset_ms: float) -> GaussifiedSignal:
    """Translate a signal in time by offset_ms, zero-filling the vacated end.

    The grid stays fixed; sample values move right for positive offsets.
    Round-tripping shift(shift(s, d), -d) loses only the samples pushed
    past the grid edge.
    """
    n = len(sig)
    off = int(round(offset_ms / sig.step_ms))
    out = np.zeros(n, dtype=np.float64)
    if off >= 0:
        if off < n:
            out[off:] = sig.samples[: n - off]
    else:
        if -off < n:
            out[: n + off] = sig.samples[-off:]
    return GaussifiedSignal(start_ms=sig.start_ms, step_ms=sig.step_ms, samples=out)


def average_signals(sigs: list[GaussifiedSignal]) -> GaussifiedSignal:
    """Pointwise mean of signals sharing one grid."""
    if not sigs:
        raise ValueError("average_signals needs at least one signal")
    first = sigs[0]
    for other in sigs[1:]:
        _require_same_grid(first, other)
    stacked = np.stack([s.samples for s in sigs])
    return GaussifiedSignal(
        start_ms=first.start_ms,
        step_ms=first.step_ms,
        samples=stacked.mean(axis=0),
    )


def tempo_prior(lag_ms: np.ndarray | float, *, center_ms: float, log_sigma: float) -> np.ndarray | float:
    """Log-normal preference for candidate beat periods.

    Peaks at center_ms and decays symmetrically in log-lag, so 2x and
    0.5x the center are penalized equally. This is what disambiguates
    near-equal autocorrelation peaks at a period and its multiples.
    """
    return np.exp(-((np.log(lag_ms / center_ms)) ** 2) / (2.0 * log_sigma * log_sigma))


def signal_mass(sig: GaussifiedSignal) -> float:
    """Discrete integral of the signal (amplitude * ms)."""
    return float(sig.samples.sum()) * sig.step_ms

def _autocorr_all(sig: GaussifiedSignal) -> np.ndarray:
    # full autocorrelation; entry n-1+L is the dot at sample lag L >= 0
    return np.correlate(sig.samples, sig.samples, "full")


def estimate_beat(
    sig: GaussifiedSignal,
    *,
    min_period_ms: float,
    max_period_ms: float,
    sigma_ms: float,
    prior_center_ms: float = 400.0,
    prior_log_sigma: float = 1.0,
    min_mass_events: float = 4.0,
) -> float:
    """Estimate the beat period as the best weighted autocorrelation lag.

    Scans lags from min_period_ms to max_period_ms at grid resolution and
    returns the lag maximizing tempo_prior(lag) * autocorrelation(lag).
    Raises InsufficientData when the window holds less mass than
    min_mass_events full-velocity hits: a couple of isolated hits have no
    periodicity worth trusting. sigma_ms must match the gaussification
    sigma; it defines how much mass one hit carries.
    """
    unit_mass = sigma_ms * math.sqrt(2.0 * math.pi)
    # 0.1% slack so truncation loss cannot starve exactly-min_mass inputs
    if signal_mass(sig) < min_mass_events * unit_mass * 0.999:
        raise InsufficientData(
            f"signal mass below {min_mass_events} full-velocity events"
        )
    n = len(sig)
    step = sig.step_ms
    lo = max(1, int(math.ceil(min_period_ms / step - 1e-9)))
    hi = min(n - 1, int(math.floor(max_period_ms / step + 1e-9)))
    if lo > hi:
        raise InsufficientData(
            f"no candidate lags between {min_period_ms} and {max_period_ms} ms"
        )
    full = _autocorr_all(sig)
    lags_ms = step * np.arange(lo, hi + 1)
    scores = full[n - 1 + lo : n - 1 + hi + 1] * step
    weighted = scores * tempo_prior(lags_ms, center_ms=prior_center_ms, log_sigma=prior_log_sigma)
    return float(lags_ms[int(np.argmax(weighted))])


def _periodic_pulses(
    beat_period_ms: float,
    meter: int,
    anchor_ms: float,
    lo_ms: float,
    hi_ms: float,
    reach_ms: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Pulse times/weights of the infinite accent grid clipped to a span.

    Pulses sit at anchor + i * beat for every integer i whose Gaussian
    reach touches [lo_ms, hi_ms]; pulses with i % meter == 0 are the
    downbeats (weight 1.0), the rest carry OFFBEAT_WEIGHT.
    """
    i_lo = int(math.ceil((lo_ms - reach_ms - anchor_ms) / beat_period_ms - 1e-9))
    i_hi = int(math.floor((hi_ms + reach_ms - anchor_ms) / beat_period_ms + 1e-9))
    idx = np.arange(i_lo, i_hi + 1)
    times = anchor_ms + beat_period_ms * idx
    weights = np.where(idx % meter == 0, 1.0, OFFBEAT_WEIGHT)
    return times, weights


def meter_prototype(
    sig_grid: GaussifiedSignal,
    beat_period_ms: float,
    meter: int,
    *,
    sigma_ms: float,
    phase_ms: float = 0.0,
) -> GaussifiedSignal:
    """Accented periodic pulse train on the signal's grid.

    The template extends conceptually to infinity in both directions:
    downbeats (weight 1.0) at grid start + phase_ms + k * meter * beat,
    OFFBEAT_WEIGHT pulses on every other beat. Only pulses whose
    truncated Gaussians touch the grid are materialized, so a template
    at any phase covers the whole window with equal energy.
    """
    start, end = sig_grid.start_ms, sig_grid.end_ms
    reach = TRUNCATION_SIGMAS * sigma_ms
    times, weights = _periodic_pulses(
        beat_period_ms, meter, start + phase_ms, start, end, reach
    )
    return gaussify_weighted(
        times,
        weights,
        sigma_ms=sigma_ms,
        start_ms=start,
        end_ms=end,
        step_ms=sig_grid.step_ms,
    )


def estimate_meter_phase(
    sig: GaussifiedSignal,
    beat_period_ms: float,
    *,
    sigma_ms: float,
) -> tuple[int, float]:
    """Find the meter and downbeat phase that best explain the signal.

    For each candidate meter the periodic accent template is tried at
    every phase offset within one measure at grid resolution; the score
    is the correlation normalized by the signal's energy and that
    phase's template energy, so every phase competes with full window
    coverage. Meters scoring within METER_TIE_TOL of the best are tied,
    and ties prefer 4 over 3 over 2 (an unaccented stream gives no meter
    evidence, and 4/4 is the default reading). Within a meter, the
    smallest phase wins.

    Returns (meter, phase_ms) with phase_ms the absolute time of a
    downbeat at or after the window start.
    """
    self_corr = correlate(sig, sig, 0.0)
    if self_corr <= 0.0:
        raise InsufficientData("signal has no energy; meter is undefined")
    if beat_period_ms <= 0:
        raise InvalidGrid(f"beat_period_ms must be positive, got {beat_period_ms}")
    n = len(sig)
    step = sig.step_ms
    start, end = sig.start_ms, sig.end_ms
    reach = TRUNCATION_SIGMAS * sigma_ms
    best: dict[int, tuple[float, float]] = {}
    for meter in SUPPORTED_METERS:
        period = meter * beat_period_ms
        phases = int(round(period / step))
        if phases < 1:
            continue
        # one extended template starting a full measure early; shifting it
        # right by any phase < one measure keeps the window fully covered
        ext_start = start - phases * step
        times, weights = _periodic_pulses(
            beat_period_ms, meter, start, ext_start, end, reach
        )
        ext = gaussify_weighted(
            times, weights, sigma_ms=sigma_ms, start_ms=ext_start, end_ms=end, step_ms=step
        ).samples
        # dots[f] = <signal, template shifted right by f steps>
        valid = np.correlate(ext, sig.samples, "valid")
        dots = valid[phases:0:-1] * step
        # per-phase template energy over the window samples it overlaps
        squares = np.concatenate(([0.0], np.cumsum(ext * ext)))
        offsets = np.arange(phases, 0, -1)
        energies = (squares[offsets + n] - squares[offsets]) * step
        if not np.any(energies > 0.0):
            continue
        scores = np.where(
            energies > 0.0, dots / np.sqrt(self_corr * energies), -np.inf
        )
        k_best = int(np.argmax(scores))
        best[meter] = (float(scores[k_best]), step * k_best)
    if not best:
        raise InsufficientData("no usable meter prototype fit in the window")
    top = max(score for score, _ in best.values())
    for meter in SUPPORTED_METERS:  # preference order on ties
        if meter in best and best[meter][0] >= top * (1.0 - METER_TIE_TOL):
            return meter, sig.start_ms + best[meter][1]
    raise AssertionError("unreachable: top score lost")


def predict_next_measure(phase_ms: float, measure_duration_ms: float, now_ms: float) -> float:
    """First downbeat time strictly after now, extrapolated from phase."""
    if measure_duration_ms <= 0:
        raise InvalidGrid(f"measure_duration_ms must be positive, got {measure_duration_ms}")
    k = max(0, int(math.floor((now_ms - phase_ms) / measure_duration_ms)) + 1)
    t = phase_ms + k * measure_duration_ms
    while t <= now_ms:
        k += 1
        t = phase_ms + k * measure_duration_ms
    return t
