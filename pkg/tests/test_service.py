"""HTTP and WebSocket behavior of the network service."""

import pytest
from starlette.testclient import TestClient

from padduet import __version__
from padduet.logio import parse_event_log, parse_trace
from padduet.service import create_app
from padduet.service.schemas import PROTOCOL_VERSION


@pytest.fixture(scope="module")
def client():
    app = create_app()
    with TestClient(app) as c:
        yield c


def make_log(client, **overrides):
    body = {"bpm": 120.0, "duration_s": 6.0}
    body.update(overrides)
    response = client.post("/metronome", json=body)
    assert response.status_code == 200
    return response.json()["log"]


def recv_until(ws, kind, limit=40):
    """Read messages until one of the wanted kind arrives."""
    for _ in range(limit):
        message = ws.receive_json()
        if message["kind"] == kind:
            return message
    raise AssertionError(f"no {kind!r} message within {limit} reads")


# -- REST --------------------------------------------------------------


def test_health_reports_protocol(client):
    body = client.get("/health").json()
    assert body == {"status": "ok", "version": __version__, "protocol": PROTOCOL_VERSION}


def test_config_defaults_include_calibrated_threshold(client):
    body = client.get("/config/defaults").json()
    assert body["defaults"]["cross_corr_min"] == 15.0
    assert body["calibrated"]["cross_corr_min"] > body["defaults"]["cross_corr_min"]
    # everything else matches the plain defaults
    spilled = {
        k: v for k, v in body["calibrated"].items() if k != "cross_corr_min"
    }
    assert spilled == {k: v for k, v in body["defaults"].items() if k != "cross_corr_min"}


def test_metronome_endpoint_returns_parsable_log(client):
    log = make_log(client, duration_s=4.0)
    events, duration_ms = parse_event_log(log)
    assert duration_ms == 4000
    assert len(events) == 16  # two players, 120 bpm, 4 s


def test_metronome_rejects_out_of_range_bpm(client):
    response = client.post("/metronome", json={"bpm": 500.0})
    assert response.status_code == 400
    assert "bpm" in response.json()["detail"]


def test_replay_round_trip(client):
    log = make_log(client)
    response = client.post("/replay", json={"log": log})
    assert response.status_code == 200
    body = response.json()
    trace = parse_trace(body["trace"])
    ticks = [r for r in trace.analysis if r["kind"] == "tick"]
    assert len(ticks) == body["summary"]["ticks"] == 12
    assert body["summary"]["mean_clarity"] > 0.5
    assert sum(body["summary"]["level_histogram"].values()) == 12


def test_replay_accepts_config_fragment(client):
    log = make_log(client)
    response = client.post(
        "/replay", json={"log": log, "config": {"compute_cadence_ms": 1000.0}}
    )
    assert response.status_code == 200
    assert response.json()["summary"]["ticks"] == 6


def test_replay_is_deterministic(client):
    log = make_log(client)
    first = client.post("/replay", json={"log": log}).json()["trace"]
    second = client.post("/replay", json={"log": log}).json()["trace"]
    assert first == second


def test_replay_rejects_malformed_log(client):
    response = client.post("/replay", json={"log": "not a log"})
    assert response.status_code == 400
    assert "line 1" in response.json()["detail"]


def test_replay_rejects_unknown_config_key(client):
    response = client.post("/replay", json={"log": make_log(client), "config": {"nope": 1}})
    assert response.status_code == 400
    assert "nope" in response.json()["detail"]


def test_export_midi_returns_smf_bytes(client):
    trace = client.post("/replay", json={"log": make_log(client)}).json()["trace"]
    response = client.post("/export-midi", json={"trace": trace})
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("audio/midi")
    assert response.content.startswith(b"MThd")


def test_export_midi_rejects_garbage(client):
    response = client.post("/export-midi", json={"trace": "garbage"})
    assert response.status_code == 400


def test_calibrate_endpoint_orderings(client):
    body = client.post("/calibrate", json={}).json()
    assert body["echo"]["cross_corr_mean"] > body["lockstep"]["cross_corr_mean"]
    assert body["lockstep"]["cross_corr_mean"] > body["independent"]["cross_corr_mean"]
    low = body["independent"]["cross_corr_mean"]
    high = body["echo"]["cross_corr_mean"]
    assert low < body["suggested_cross_corr_min"] < high


# -- WebSocket sessions ------------------------------------------------


def test_ws_hello_assigns_player_slots(client):
    with client.websocket_connect("/ws/slots") as w1:
        w1.send_json({"kind": "hello"})
        joined = w1.receive_json()
        assert joined["kind"] == "session"
        assert joined["event"] == "joined"
        assert joined["player"] == 1
        assert joined["config"]["sigma_ms"] == 30.0
        assert joined["protocol"] == PROTOCOL_VERSION
        with client.websocket_connect("/ws/slots") as w2:
            w2.send_json({"kind": "hello"})
            assert w2.receive_json()["player"] == 2
            notice = recv_until(w1, "session")
            assert notice["event"] == "partner_joined"
            assert notice["player"] == 2


def test_ws_requested_slot_conflict(client):
    with client.websocket_connect("/ws/conflict") as w1:
        w1.send_json({"kind": "hello", "player": 2})
        assert w1.receive_json()["player"] == 2
        with client.websocket_connect("/ws/conflict") as w2:
            w2.send_json({"kind": "hello", "player": 2})
            assert w2.receive_json()["kind"] == "error"
            w2.send_json({"kind": "hello"})
            assert recv_until(w2, "session")["player"] == 1


def test_ws_hit_gets_prompt_state(client):
    with client.websocket_connect("/ws/hit") as ws:
        ws.send_json({"kind": "hello"})
        recv_until(ws, "session")
        ws.send_json({"kind": "hit", "player": 1, "velocity": 100})
        state = recv_until(ws, "state")
        assert state["level"] == 0
        assert state["points"] == 0
        assert state["accompaniment_on"] is False


def test_ws_server_clock_is_authoritative(client):
    with client.websocket_connect("/ws/clock") as ws:
        ws.send_json({"kind": "hello"})
        recv_until(ws, "session")
        # an absurd client timestamp must not leak into the timeline
        ws.send_json(
            {"kind": "hit", "player": 1, "velocity": 100, "client_t_ms": 9.9e12}
        )
        state = recv_until(ws, "state")
        assert state["t_ms"] < 60_000


def test_ws_malformed_message_keeps_session_alive(client):
    with client.websocket_connect("/ws/malformed") as ws:
        ws.send_json({"kind": "hello"})
        recv_until(ws, "session")
        ws.send_json({"kind": "hit", "player": 1, "velocity": 4000})
        error = recv_until(ws, "error")
        assert "malformed" in error["message"]
        ws.send_json({"kind": "hit", "player": 1, "velocity": 90})
        assert recv_until(ws, "state")["points"] == 0


def test_ws_both_clients_receive_identical_states(client):
    with client.websocket_connect("/ws/pair") as w1:
        w1.send_json({"kind": "hello"})
        recv_until(w1, "session")
        with client.websocket_connect("/ws/pair") as w2:
            w2.send_json({"kind": "hello"})
            recv_until(w2, "session")
            recv_until(w1, "session")  # partner_joined
            w1.send_json({"kind": "hit", "player": 1, "velocity": 100})
            # broadcasts reach both sockets in the same order
            assert recv_until(w1, "state") == recv_until(w2, "state")


def test_ws_third_client_rejected(client):
    with client.websocket_connect("/ws/full") as w1:
        w1.send_json({"kind": "hello"})
        recv_until(w1, "session")
        with client.websocket_connect("/ws/full") as w2:
            w2.send_json({"kind": "hello"})
            recv_until(w2, "session")
            with client.websocket_connect("/ws/full") as w3:
                refusal = w3.receive_json()
                assert refusal["kind"] == "error"
                assert "two players" in refusal["message"]


def test_ws_partner_left_notification(client):
    with client.websocket_connect("/ws/leaver") as w1:
        w1.send_json({"kind": "hello"})
        recv_until(w1, "session")
        with client.websocket_connect("/ws/leaver") as w2:
            w2.send_json({"kind": "hello"})
            recv_until(w2, "session")
            recv_until(w1, "session")
            w2.send_json({"kind": "bye"})
        notice = recv_until(w1, "session")
        assert notice["event"] == "partner_left"


def test_ws_tick_state_arrives_without_hits(client):
    with client.websocket_connect("/ws/ticks") as ws:
        ws.send_json({"kind": "hello"})
        recv_until(ws, "session")
        state = recv_until(ws, "state")  # ticker pushes within one cadence
        assert state["bpm"] is None
        assert state["accompaniment_on"] is False
