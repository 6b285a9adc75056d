"""Service launcher: `python -m roundtable.service --scripted fixtures/`.

Live mode reads LM_API_KEY and SEARCH_API_KEY from the environment; the bind
address comes from BIND_ADDR (host:port) unless overridden by flags.
"""

from __future__ import annotations

import argparse
import os
import tempfile

import uvicorn

from ..gateways.config import GatewayConfig, build_gateways
from .app import create_app
from .registry import SessionRegistry


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="roundtable-service")
    parser.add_argument("--config", help="gateway config JSON")
    parser.add_argument("--scripted", help="scripted fixtures directory (offline mode)")
    parser.add_argument("--data-dir", help="session persistence directory")
    parser.add_argument("--host", default=None)
    parser.add_argument("--port", type=int, default=None)
    args = parser.parse_args(argv)

    if args.config:
        config = GatewayConfig.from_file(args.config)
    elif args.scripted:
        config = GatewayConfig(mode="scripted", fixtures_dir=args.scripted)
    else:
        config = GatewayConfig(mode="live")

    bind = os.environ.get("BIND_ADDR", "127.0.0.1:8000")
    host, _, port = bind.partition(":")
    host = args.host or host or "127.0.0.1"
    port_num = args.port or int(port or 8000)

    data_dir = args.data_dir or tempfile.mkdtemp(prefix="roundtable-sessions-")
    registry = SessionRegistry(lambda: build_gateways(config), data_dir)
    registry.recover_all()
    app = create_app(registry)
    uvicorn.run(app, host=host, port=port_num)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
