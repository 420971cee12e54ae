"""Network-facing game service: REST tooling endpoints plus the
two-player WebSocket wire protocol."""

from .app import create_app

__all__ = ["create_app"]
