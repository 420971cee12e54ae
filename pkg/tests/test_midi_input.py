"""Pad message mapping."""

import pytest

from padduet.errors import DeviceNotFound
from padduet.midi_input import map_midi_message, open_pad_device
from padduet.signals import PadEvent


def test_note_on_maps_to_event():
    event = map_midi_message(0x90, 38, 101, 1234.6, 2)
    assert event == PadEvent(t_ms=1235, player=2, velocity=101)


def test_note_on_any_channel():
    assert map_midi_message(0x9F, 40, 64, 0.0, 1) is not None


@pytest.mark.parametrize(
    "status, data2",
    [
        (0x80, 64),  # note-off
        (0x90, 0),  # note-on velocity 0 means release
        (0xA0, 64),  # aftertouch
        (0xB0, 64),  # controller
    ],
)
def test_non_strikes_ignored(status, data2):
    assert map_midi_message(status, 38, data2, 0.0, 1) is None


def test_device_open_is_honest():
    with pytest.raises(DeviceNotFound, match="replay"):
        open_pad_device("pads-1")
