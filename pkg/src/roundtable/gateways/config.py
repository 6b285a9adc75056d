"""Gateway configuration file: endpoints, model names, blocklist, mode."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .base import Gateways
from .filtering import SourceFilter, load_default_blocklist
from .scripted import load_scripted_gateways


@dataclass
class GatewayConfig:
    mode: str = "scripted"  # "scripted" | "live"
    fixtures_dir: str | None = None
    lm_endpoint: str = "https://api.openai.com/v1"
    lm_model: str = "gpt-4o-2024-05-13"
    embedding_model: str = "text-embedding-3-small"
    search_endpoint: str = "https://api.ydc-index.io/search"
    blocklist: list[str] = field(default_factory=load_default_blocklist)

    @classmethod
    def from_file(cls, path: str | Path) -> "GatewayConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        cfg = cls()
        for key in (
            "mode",
            "fixtures_dir",
            "lm_endpoint",
            "lm_model",
            "embedding_model",
            "search_endpoint",
            "blocklist",
        ):
            if key in raw:
                setattr(cfg, key, raw[key])
        if cfg.mode not in ("scripted", "live"):
            raise ValueError(f"unknown gateway mode {cfg.mode!r}")
        return cfg


def build_gateways(config: GatewayConfig) -> Gateways:
    source_filter = SourceFilter(config.blocklist)
    if config.mode == "scripted":
        if not config.fixtures_dir:
            raise ValueError("scripted mode requires fixtures_dir")
        return load_scripted_gateways(config.fixtures_dir, source_filter=source_filter)
    from .live import LiveEmbedder, LiveLM, LiveSearch

    return Gateways(
        lm=LiveLM(config.lm_endpoint, config.lm_model),
        search=LiveSearch(config.search_endpoint, source_filter=source_filter),
        embedder=LiveEmbedder(config.lm_endpoint, config.embedding_model),
    )
