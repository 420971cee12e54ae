"""Session configuration: one flat, validated bundle of engine knobs.

Every tunable lives here with its shipped default. A config file is a
JSON object with any subset of these fields; omitted fields keep their
defaults. Validation errors name the offending field.

cross_corr_min ships at the legacy initial value; run the calibrate
command to derive a value matched to the current signal constants (the
packaged calibration snapshot is exposed via calibrated_defaults()).
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError


@dataclass(frozen=True)
class SessionConfig:
    # gaussification / analysis grid
    sigma_ms: float = 30.0
    grid_step_ms: float = 10.0
    window_ms: float = 12000.0
    density_window_ms: float = 10000.0
    # beat search
    min_period_ms: float = 250.0
    max_period_ms: float = 1500.0
    tempo_prior_center_ms: float = 400.0
    tempo_prior_log_sigma: float = 1.0
    min_mass_events: float = 4.0
    # level thresholds
    clarity_min: float = 0.4
    density_min: float = 0.5
    cross_corr_min: float = 15.0
    # cadences and smoothing
    compute_cadence_ms: float = 500.0
    award_cadence_ms: float = 1000.0
    median_window: int = 15
    warmup_ms: float = 5000.0
    # sync and scoring
    sync_window_ms: float = 50.0
    point_weights: tuple[int, int, int, int] = (0, 1, 2, 3)
    gain_map: tuple[float, float, float, float] = (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)
    # generation
    rng_seed: int = 0
    transpose: int = 0
    program_pad: int = 90  # General MIDI 1-based patch numbers
    program_guitar: int = 25
    program_bass: int = 34
    # service scheduling
    scheduling_horizon_ms: float = 150.0

    def validate(self) -> "SessionConfig":
        def positive(name: str) -> None:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name}: must be positive, got {getattr(self, name)}")

        for name in (
            "sigma_ms",
            "grid_step_ms",
            "window_ms",
            "density_window_ms",
            "min_period_ms",
            "max_period_ms",
            "tempo_prior_center_ms",
            "tempo_prior_log_sigma",
            "compute_cadence_ms",
            "award_cadence_ms",
            "scheduling_horizon_ms",
        ):
            positive(name)
        if self.window_ms < self.density_window_ms:
            raise ConfigError(
                "window_ms: analysis window must cover the density window "
                f"({self.window_ms} < {self.density_window_ms})"
            )
        if self.min_period_ms >= self.max_period_ms:
            raise ConfigError("min_period_ms: must be below max_period_ms")
        if self.min_period_ms < self.grid_step_ms:
            raise ConfigError("min_period_ms: must be at least one grid step")
        if self.max_period_ms > self.window_ms:
            raise ConfigError("max_period_ms: must fit inside window_ms")
        if not self.min_mass_events > 0:
            raise ConfigError("min_mass_events: must be positive")
        if not 0.0 <= self.clarity_min <= 1.0:
            raise ConfigError(f"clarity_min: must be in [0, 1], got {self.clarity_min}")
        if self.density_min < 0 or self.cross_corr_min < 0:
            raise ConfigError("density_min/cross_corr_min: must be non-negative")
        ratio = self.award_cadence_ms / self.compute_cadence_ms
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigError(
                "award_cadence_ms: must be a whole multiple of compute_cadence_ms"
            )
        if self.median_window < 1:
            raise ConfigError("median_window: must be at least 1")
        if self.warmup_ms < 0 or self.sync_window_ms < 0:
            raise ConfigError("warmup_ms/sync_window_ms: must be non-negative")
        if len(self.point_weights) != 4 or any(w < 0 for w in self.point_weights):
            raise ConfigError("point_weights: need 4 non-negative weights")
        if list(self.point_weights) != sorted(self.point_weights):
            raise ConfigError("point_weights: must be non-decreasing")
        if len(self.gain_map) != 4:
            raise ConfigError("gain_map: need 4 gains")
        if self.gain_map[0] != 0.0:
            raise ConfigError("gain_map: level 0 must be silent (gain 0)")
        if any(not 0.0 <= g <= 1.0 for g in self.gain_map):
            raise ConfigError("gain_map: gains must be in [0, 1]")
        if list(self.gain_map) != sorted(self.gain_map):
            raise ConfigError("gain_map: must be non-decreasing")
        if self.rng_seed < 0:
            raise ConfigError("rng_seed: must be non-negative")
        if abs(self.transpose) > 24:
            raise ConfigError("transpose: must stay within two octaves")
        for name in ("program_pad", "program_guitar", "program_bass"):
            if not 1 <= getattr(self, name) <= 128:
                raise ConfigError(f"{name}: General MIDI patch must be 1..128")
        return self

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["point_weights"] = list(self.point_weights)
        out["gain_map"] = list(self.gain_map)
        return out


_FIELD_NAMES = {f.name for f in dataclasses.fields(SessionConfig)}
_TUPLE_FIELDS = {"point_weights", "gain_map"}


def config_from_dict(data: dict) -> SessionConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"config must be an object, got {type(data).__name__}")
    kwargs = {}
    for key, value in data.items():
        if key not in _FIELD_NAMES:
            raise ConfigError(f"{key}: unknown configuration field")
        kwargs[key] = tuple(value) if key in _TUPLE_FIELDS else value
    try:
        cfg = SessionConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def load_config(path: str) -> SessionConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return config_from_dict(data)


def calibrated_defaults() -> SessionConfig:
    """Defaults with the packaged calibration snapshot applied."""
    text = (
        resources.files("padduet")
        .joinpath("data/calibrated.json")
        .read_text(encoding="utf-8")
    )
    return config_from_dict(json.loads(text))
