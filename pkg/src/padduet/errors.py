"""Exception types shared across the engine."""


class DuetError(Exception):
    """Base class for all padduet errors."""


class InvalidGrid(DuetError):
    """Sampling grid parameters are unusable (bad step, inverted range)."""


class GridMismatch(DuetError):
    """Two signals were combined that do not share start/step/length."""


class InsufficientData(DuetError):
    """Not enough signal mass in the window to estimate anything."""


class DegenerateSignal(DuetError):
    """A normalization denominator is zero (signal identically zero)."""


class UnsupportedMeter(DuetError):
    """Meter outside the supported set {2, 3, 4}."""


class SessionClosed(DuetError):
    """Operation on a session that has already been closed."""


class MalformedLog(DuetError):
    """An event log or trace file failed to parse.

    Carries the 1-based line number where parsing failed.
    """

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ConfigError(DuetError):
    """A configuration value failed validation. Names the field."""


class DeviceNotFound(DuetError):
    """No usable MIDI input device or backend is available."""
