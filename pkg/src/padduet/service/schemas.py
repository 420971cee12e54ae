"""Wire protocol and REST message models.

Every message carries a `kind` discriminator. Client messages arrive as
JSON text over the WebSocket; the protocol field lets clients detect
incompatible servers early. Hit timestamps supplied by clients are
advisory only: the server clock is authoritative, so the engine sees one
consistent timeline.
"""

from __future__ import annotations

from typing import Annotated, Literal, Union

from pydantic import BaseModel, Field, TypeAdapter

PROTOCOL_VERSION = 1


# -- client -> server --------------------------------------------------


class ClientHello(BaseModel):
    kind: Literal["hello"]
    player: int | None = Field(default=None, ge=1, le=2)
    protocol: int = PROTOCOL_VERSION


class ClientHit(BaseModel):
    kind: Literal["hit"]
    player: int = Field(ge=1, le=2)
    velocity: int = Field(ge=1, le=127)
    client_t_ms: float | None = None  # advisory; server time wins


class ClientBye(BaseModel):
    kind: Literal["bye"]


ClientMessage = Annotated[
    Union[ClientHello, ClientHit, ClientBye], Field(discriminator="kind")
]
client_message_adapter: TypeAdapter = TypeAdapter(ClientMessage)


# -- server -> client --------------------------------------------------


class ServerState(BaseModel):
    kind: Literal["state"] = "state"
    t_ms: float
    level: int = Field(ge=0, le=3)
    points: int = Field(ge=0)
    bpm: float | None = Field(default=None, gt=0)
    meter: int | None = None
    clarity: float | None = None
    accompaniment_on: bool = False
    next_downbeat_in_ms: float | None = None


class ServerNote(BaseModel):
    kind: Literal["note"] = "note"
    voice: str
    pitch: int = Field(ge=0, le=127)
    gain: float = Field(ge=0.0, le=1.0)
    play_at_ms: float
    duration_ms: float = Field(gt=0)
    chord: str


class ServerSession(BaseModel):
    kind: Literal["session"] = "session"
    session_id: str
    event: Literal["joined", "partner_joined", "partner_left", "closed"]
    player: int | None = None
    config: dict | None = None
    protocol: int = PROTOCOL_VERSION


class ServerError(BaseModel):
    kind: Literal["error"] = "error"
    message: str


# -- REST tooling ------------------------------------------------------


class HealthResponse(BaseModel):
    status: str
    version: str
    protocol: int


class ConfigDefaultsResponse(BaseModel):
    defaults: dict
    calibrated: dict


class TraceSummary(BaseModel):
    ticks: int
    mean_clarity: float | None
    level_histogram: dict[str, int]
    final_points: int
    bpm_timeline: list[tuple[float, float]]
    notes: int
    resyncs: int


class ReplayRequest(BaseModel):
    log: str
    config: dict = Field(default_factory=dict)


class ReplayResponse(BaseModel):
    trace: str
    summary: TraceSummary


class MetronomeRequest(BaseModel):
    bpm: float
    duration_s: float = 20.0
    jitter_ms: float = Field(default=0.0, ge=0.0)
    meter: int = 4
    accent: list[int] | None = None
    players: Literal["one", "two", "echo"] = "two"
    seed: int = Field(default=0, ge=0)


class MetronomeResponse(BaseModel):
    log: str
    events: int
    duration_ms: int


class CalibrateRequest(BaseModel):
    config: dict = Field(default_factory=dict)


class ModeStatsModel(BaseModel):
    ticks: int
    clarity_mean: float
    cross_corr_mean: float


class CalibrateResponse(BaseModel):
    lockstep: ModeStatsModel
    echo: ModeStatsModel
    independent: ModeStatsModel
    suggested_cross_corr_min: float
    battery_version: int


class ExportMidiRequest(BaseModel):
    trace: str
