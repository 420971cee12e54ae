"""FastAPI application: REST tooling plus live two-player sessions.

REST endpoints wrap the engine's pure functions (replay, log synthesis,
calibration, MIDI export) so every CLI verb is also a network call. The
WebSocket endpoint hosts live sessions: up to two clients per session
id, hits timestamped on arrival with the server's monotonic clock, an
analysis tick loop per session, and state/note messages fanned out to
both players.

Within one session all engine mutations happen under a lock with
timestamps taken inside it, so the single-writer time ordering the
engine requires holds no matter how the event loop interleaves socket
handlers and the ticker.
"""

from __future__ import annotations

import asyncio
import re
import time
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import Response
from pydantic import ValidationError

from .. import __version__
from ..calibrate import run_battery
from ..config import SessionConfig, calibrated_defaults, config_from_dict
from ..errors import DuetError, SessionClosed
from ..logio import parse_trace, serialize_event_log
from ..midi import export_midi
from ..session import Session, replay_log, summarize_trace
from ..signals import PadEvent
from ..synthlog import metronome_log
from .schemas import (
    PROTOCOL_VERSION,
    CalibrateRequest,
    CalibrateResponse,
    ClientHello,
    ClientHit,
    ConfigDefaultsResponse,
    ExportMidiRequest,
    HealthResponse,
    MetronomeRequest,
    MetronomeResponse,
    ReplayRequest,
    ReplayResponse,
    ServerError,
    ServerNote,
    ServerSession,
    ServerState,
    client_message_adapter,
)


class LiveSession:
    """One hosted duet: engine state, clock, sockets, and ticker."""

    def __init__(self, session_id: str, config: SessionConfig):
        self.session_id = session_id
        self.config = config
        self.engine = Session(config)
        self.lock = asyncio.Lock()
        self.sockets: dict[WebSocket, int | None] = {}
        self.ticker: asyncio.Task | None = None
        self._t0 = time.monotonic()

    def now_ms(self) -> float:
        return (time.monotonic() - self._t0) * 1000.0

    def claim_player(self, socket: WebSocket, wanted: int | None) -> int | None:
        taken = {p for p in self.sockets.values() if p is not None}
        if wanted is not None:
            if wanted in taken:
                return None
            self.sockets[socket] = wanted
            return wanted
        for player in (1, 2):
            if player not in taken:
                self.sockets[socket] = player
                return player
        return None

    async def broadcast(self, messages: list) -> None:
        for socket in list(self.sockets):
            for message in messages:
                try:
                    await socket.send_json(message.model_dump())
                except Exception:
                    break  # its disconnect handler will clean up

    def state_message(self, now_ms: float) -> ServerState:
        snap = self.engine.snapshot(now_ms)
        next_in = snap["next_downbeat_ms"]
        return ServerState(
            t_ms=snap["t_ms"],
            level=snap["level"],
            points=snap["points"],
            bpm=snap["bpm"],
            meter=snap["meter"],
            clarity=snap["clarity"],
            accompaniment_on=snap["accompaniment_on"],
            next_downbeat_in_ms=None if next_in is None else next_in - now_ms,
        )

    def note_messages(self) -> list[ServerNote]:
        return [
            ServerNote(
                voice=note["voice"],
                pitch=min(127, max(0, note["pitch"])),
                gain=note["gain"],
                play_at_ms=note["measure_ms"] + note["onset_ms"],
                duration_ms=note["duration_ms"],
                chord=note["chord"],
            )
            for note in self.engine.drain_notes()
        ]

    async def run_ticker(self) -> None:
        cadence_s = self.config.compute_cadence_ms / 1000.0
        try:
            while True:
                await asyncio.sleep(cadence_s)
                async with self.lock:
                    now = self.now_ms()
                    try:
                        self.engine.analysis_tick(now)
                    except SessionClosed:
                        return
                    outgoing = [*self.note_messages(), self.state_message(now)]
                await self.broadcast(outgoing)
        except asyncio.CancelledError:
            pass


def _effective_config(fragment: dict) -> SessionConfig:
    try:
        return config_from_dict(fragment)
    except DuetError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def _write_session_trace(trace_dir: Path, session_id: str, live: LiveSession) -> None:
    safe = re.sub(r"[^A-Za-z0-9_-]", "_", session_id) or "session"
    trace_dir.mkdir(parents=True, exist_ok=True)
    path = trace_dir / f"{safe}.trace.jsonl"
    path.write_text(live.engine.trace().serialize(), encoding="utf-8")


def create_app(
    config: SessionConfig | None = None, log_dir: str | Path | None = None
) -> FastAPI:
    base_config = (config or SessionConfig()).validate()
    app = FastAPI(title="padduet service", version=__version__)
    sessions: dict[str, LiveSession] = {}
    app.state.sessions = sessions
    app.state.config = base_config
    trace_dir = Path(log_dir) if log_dir is not None else None

    # -- REST tooling --------------------------------------------------

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__, protocol=PROTOCOL_VERSION)

    @app.get("/config/defaults", response_model=ConfigDefaultsResponse)
    def config_defaults() -> ConfigDefaultsResponse:
        return ConfigDefaultsResponse(
            defaults=SessionConfig().to_dict(),
            calibrated=calibrated_defaults().to_dict(),
        )

    @app.post("/replay", response_model=ReplayResponse)
    def replay(request: ReplayRequest) -> ReplayResponse:
        cfg = _effective_config(request.config)
        try:
            trace = replay_log(request.log, cfg)
        except DuetError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return ReplayResponse(trace=trace.serialize(), summary=summarize_trace(trace))

    @app.post("/metronome", response_model=MetronomeResponse)
    def metronome(request: MetronomeRequest) -> MetronomeResponse:
        try:
            events, duration_ms = metronome_log(
                bpm=request.bpm,
                duration_s=request.duration_s,
                jitter_ms=request.jitter_ms,
                meter=request.meter,
                accent=tuple(request.accent) if request.accent else None,
                players=request.players,
                seed=request.seed,
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return MetronomeResponse(
            log=serialize_event_log(events, duration_ms),
            events=len(events),
            duration_ms=duration_ms,
        )

    @app.post("/calibrate", response_model=CalibrateResponse)
    def calibrate(request: CalibrateRequest) -> CalibrateResponse:
        cfg = _effective_config(request.config)
        report = run_battery(cfg)
        return CalibrateResponse(**report.to_dict())

    @app.post("/export-midi")
    def export_midi_endpoint(request: ExportMidiRequest) -> Response:
        try:
            trace = parse_trace(request.trace)
            blob = export_midi(trace)
        except DuetError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return Response(content=blob, media_type="audio/midi")

    # -- live sessions ------------------------------------------------

    @app.websocket("/ws/{session_id}")
    async def websocket_endpoint(websocket: WebSocket, session_id: str) -> None:
        await websocket.accept()
        live = sessions.get(session_id)
        if live is None:
            live = LiveSession(session_id, base_config)
            sessions[session_id] = live
            live.ticker = asyncio.ensure_future(live.run_ticker())
        if len(live.sockets) >= 2:
            await websocket.send_json(
                ServerError(message="session already has two players").model_dump()
            )
            await websocket.close()
            return
        live.sockets[websocket] = None
        try:
            await _serve_client(live, websocket)
        except WebSocketDisconnect:
            pass
        finally:
            live.sockets.pop(websocket, None)
            if live.sockets:
                await live.broadcast(
                    [ServerSession(session_id=live.session_id, event="partner_left")]
                )
            else:
                if live.ticker is not None:
                    live.ticker.cancel()
                async with live.lock:
                    live.engine.close()
                    if trace_dir is not None:
                        _write_session_trace(trace_dir, session_id, live)
                sessions.pop(session_id, None)

    async def _serve_client(live: LiveSession, websocket: WebSocket) -> None:
        while True:
            data = await websocket.receive_json()
            try:
                message = client_message_adapter.validate_python(data)
            except ValidationError as exc:
                await websocket.send_json(
                    ServerError(message=f"malformed message: {exc.errors()[0]['msg']}").model_dump()
                )
                continue
            if isinstance(message, ClientHello):
                player = live.claim_player(websocket, message.player)
                if player is None:
                    await websocket.send_json(
                        ServerError(message="requested player slot is taken").model_dump()
                    )
                    continue
                await websocket.send_json(
                    ServerSession(
                        session_id=live.session_id,
                        event="joined",
                        player=player,
                        config=live.config.to_dict(),
                    ).model_dump()
                )
                for other in live.sockets:
                    if other is not websocket:
                        await other.send_json(
                            ServerSession(
                                session_id=live.session_id, event="partner_joined", player=player
                            ).model_dump()
                        )
            elif isinstance(message, ClientHit):
                async with live.lock:
                    now = live.now_ms()
                    event = PadEvent(
                        t_ms=int(now), player=message.player, velocity=message.velocity
                    )
                    try:
                        live.engine.ingest(event)
                    except SessionClosed:
                        await websocket.send_json(
                            ServerError(message="session is closed").model_dump()
                        )
                        return
                    outgoing = [*live.note_messages(), live.state_message(now)]
                await live.broadcast(outgoing)
            else:  # bye
                await websocket.close()
                return

    return app
