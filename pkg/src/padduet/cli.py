"""Operator command line: replay, log synthesis, calibration, MIDI export.

Every subcommand is a thin client over the HTTP service. By default the
service runs in-process (no sockets), so the commands work offline; pass
``--server URL`` to point the same commands at a running instance. Either
way the engine only ever executes behind the service API, so CLI results
and network results cannot drift apart.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

import click
import httpx

from . import __version__
from .config import load_config
from .errors import DuetError
from .midi_input import open_pad_device


def _request(server: str | None, method: str, path: str, payload: dict | None = None):
    """Issue one request against a remote server or an in-process app."""

    async def go() -> httpx.Response:
        if server is None:
            from .service import create_app

            transport = httpx.ASGITransport(app=create_app())
            client = httpx.AsyncClient(transport=transport, base_url="http://engine.local")
        else:
            client = httpx.AsyncClient(base_url=server, timeout=60.0)
        async with client:
            return await client.request(method, path, json=payload)

    try:
        response = asyncio.run(go())
    except httpx.HTTPError as exc:
        raise click.ClickException(f"cannot reach {server}: {exc}")
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise click.ClickException(str(detail))
    return response


def _config_fragment(config_path: str | None, seed: int | None) -> dict:
    fragment: dict = {}
    if config_path is not None:
        try:
            fragment = load_config(config_path).to_dict()
        except (OSError, DuetError) as exc:
            raise click.ClickException(str(exc))
    if seed is not None:
        fragment["rng_seed"] = seed
    return fragment


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise click.ClickException(str(exc))


def _write_output(path: Path, data: str | bytes) -> None:
    try:
        if isinstance(data, bytes):
            path.write_bytes(data)
        else:
            path.write_text(data, encoding="utf-8")
    except OSError as exc:
        raise click.ClickException(str(exc))


def _bpm_spans(timeline: list[list[float]]) -> list[str]:
    """Collapse the per-tick bpm readings into constant spans."""
    spans: list[str] = []
    run_start = run_bpm = None
    last_t = None
    for t_ms, bpm in timeline:
        if run_bpm is None or bpm != run_bpm:
            if run_bpm is not None:
                spans.append(f"{run_start:.0f}-{last_t:.0f} ms: {run_bpm:g} bpm")
            run_start, run_bpm = t_ms, bpm
        last_t = t_ms
    if run_bpm is not None:
        spans.append(f"{run_start:.0f}-{last_t:.0f} ms: {run_bpm:g} bpm")
    return spans


@click.group()
@click.version_option(version=__version__, prog_name="padduet")
@click.option(
    "--server",
    default=None,
    metavar="URL",
    envvar="PADDUET_SERVER",
    help="Base URL of a running service; default executes in-process.",
)
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Two-player rhythm engine tools."""
    ctx.obj = server


@main.command()
@click.option("--host", default="127.0.0.1", envvar="PADDUET_HOST", show_default=True)
@click.option("--port", default=8765, type=int, envvar="PADDUET_PORT", show_default=True)
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    envvar="PADDUET_CONFIG",
    default=None,
    help="Session configuration file (JSON, partial fields allowed).",
)
@click.option(
    "--midi-device",
    default=None,
    envvar="PADDUET_MIDI_DEVICE",
    help="Local MIDI pad device to bridge into sessions.",
)
@click.option(
    "--log-dir",
    type=click.Path(file_okay=False),
    envvar="PADDUET_LOG_DIR",
    default=None,
    help="Directory for session traces written when sessions end.",
)
def serve(host, port, config_path, midi_device, log_dir):
    """Run the network service until interrupted."""
    from .config import SessionConfig
    from .service import create_app

    config = SessionConfig()
    if config_path is not None:
        try:
            config = load_config(config_path)
        except DuetError as exc:
            raise click.ClickException(str(exc))
    if midi_device is not None:
        try:
            open_pad_device(midi_device)
        except DuetError as exc:
            raise click.ClickException(str(exc))
    import uvicorn

    uvicorn.run(create_app(config, log_dir=log_dir), host=host, port=port)


@main.command()
@click.argument("log_path", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Session configuration file (JSON, partial fields allowed).",
)
@click.option("--seed", type=int, default=None, help="Override the accompaniment RNG seed.")
@click.option(
    "--out",
    "out_path",
    type=click.Path(dir_okay=False, writable=True),
    default=None,
    help="Trace destination; defaults to the log path with a .trace.jsonl suffix.",
)
@click.pass_obj
def replay(server, log_path, config_path, seed, out_path):
    """Re-run a recorded event log and summarize what the engine heard."""
    payload = {
        "log": _read_text(log_path),
        "config": _config_fragment(config_path, seed),
    }
    body = _request(server, "POST", "/replay", payload).json()
    destination = (
        Path(out_path) if out_path else Path(log_path).with_suffix(".trace.jsonl")
    )
    _write_output(destination, body["trace"])
    summary = body["summary"]
    histogram = summary["level_histogram"]
    click.echo(f"trace written to {destination}")
    click.echo(f"ticks         {summary['ticks']}")
    clarity = summary["mean_clarity"]
    click.echo(f"mean clarity  {'-' if clarity is None else f'{clarity:.3f}'}")
    click.echo(
        "levels        "
        + "  ".join(f"{level}:{histogram.get(str(level), 0)}" for level in range(4))
    )
    click.echo(f"points        {summary['final_points']}")
    click.echo(f"notes         {summary['notes']}   resyncs {summary['resyncs']}")
    for span in _bpm_spans(summary["bpm_timeline"]):
        click.echo(f"bpm           {span}")


@main.command()
@click.option("--bpm", type=float, required=True)
@click.option("--duration", "duration_s", type=float, default=20.0, show_default=True)
@click.option("--jitter", "jitter_ms", type=float, default=0.0, show_default=True)
@click.option("--meter", type=int, default=4, show_default=True)
@click.option(
    "--accent",
    default=None,
    help="Comma-separated velocity cycle, e.g. 127,64,64,64.",
)
@click.option(
    "--players",
    type=click.Choice(["one", "two", "echo"]),
    default="two",
    show_default=True,
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--out",
    "out_path",
    type=click.Path(dir_okay=False, writable=True),
    default=None,
    help="Log destination; defaults to stdout.",
)
@click.pass_obj
def metronome(server, bpm, duration_s, jitter_ms, meter, accent, players, seed, out_path):
    """Synthesize a deterministic test log of simulated players."""
    accents = None
    if accent is not None:
        try:
            accents = [int(part) for part in accent.split(",")]
        except ValueError:
            raise click.ClickException(f"accent: expected comma-separated integers, got {accent!r}")
    payload = {
        "bpm": bpm,
        "duration_s": duration_s,
        "jitter_ms": jitter_ms,
        "meter": meter,
        "accent": accents,
        "players": players,
        "seed": seed,
    }
    body = _request(server, "POST", "/metronome", payload).json()
    if out_path is None:
        click.echo(body["log"], nl=False)
    else:
        _write_output(Path(out_path), body["log"])
        click.echo(
            f"{body['events']} events over {body['duration_ms']} ms written to {out_path}"
        )


@main.command()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Session configuration file (JSON, partial fields allowed).",
)
@click.option(
    "--out",
    "out_path",
    type=click.Path(dir_okay=False, writable=True),
    default=None,
    help="Write the full report as JSON.",
)
@click.pass_obj
def calibrate(server, config_path, out_path):
    """Run the metronome battery and suggest an imitation threshold."""
    payload = {"config": _config_fragment(config_path, None)}
    body = _request(server, "POST", "/calibrate", payload).json()
    click.echo(f"battery version {body['battery_version']}")
    for mode in ("lockstep", "echo", "independent"):
        stats = body[mode]
        click.echo(
            f"{mode:<12} ticks {stats['ticks']:>4}   "
            f"clarity {stats['clarity_mean']:.3f}   "
            f"cross_corr {stats['cross_corr_mean']:.3f}"
        )
    click.echo(f"suggested cross_corr_min: {body['suggested_cross_corr_min']}")
    if out_path is not None:
        _write_output(Path(out_path), json.dumps(body, indent=2, sort_keys=True) + "\n")
        click.echo(f"report written to {out_path}")


@main.command("export-midi")
@click.argument("trace_path", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--out",
    "out_path",
    type=click.Path(dir_okay=False, writable=True),
    default=None,
    help="MIDI destination; defaults to the trace path with a .mid suffix.",
)
@click.pass_obj
def export_midi_command(server, trace_path, out_path):
    """Render a session trace to a Standard MIDI File."""
    payload = {"trace": _read_text(trace_path)}
    response = _request(server, "POST", "/export-midi", payload)
    destination = Path(out_path) if out_path else Path(trace_path).with_suffix(".mid")
    _write_output(destination, response.content)
    click.echo(f"{len(response.content)} bytes written to {destination}")


if __name__ == "__main__":
    main()
