"""Translating raw MIDI pad messages into engine events.

The mapping layer is pure and fully testable: a note-on with nonzero
velocity becomes a PadEvent, everything else (note-offs, the note-on
velocity-0 idiom, aftertouch, controllers) is ignored, because only the
strike instant and its force matter to the analysis.

This build ships without a hardware MIDI backend, so opening a device
always raises DeviceNotFound; live play goes through the network service
and recorded play through log replay. The mapping stays here so a
backend can be dropped in without touching the engine.
"""

from __future__ import annotations

from .errors import DeviceNotFound
from .signals import PadEvent

NOTE_ON = 0x90
NOTE_OFF = 0x80


def map_midi_message(
    status: int, data1: int, data2: int, t_ms: float, player: int
) -> PadEvent | None:
    """PadEvent for a strike, None for anything that is not one."""
    kind = status & 0xF0
    if kind == NOTE_ON and data2 > 0:
        return PadEvent(t_ms=int(round(t_ms)), player=player, velocity=min(127, data2))
    return None


def open_pad_device(name: str | None = None) -> None:
    raise DeviceNotFound(
        "no MIDI backend is available in this build; connect pads through "
        "the network service or replay a recorded event log instead"
        + (f" (requested device: {name})" if name else "")
    )
