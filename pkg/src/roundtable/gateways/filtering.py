"""Source filtering and URL canonicalization for search results.

The default blocklist encodes the usual reliability rules for encyclopedic
sourcing: user-generated content, social media, and self-published platforms
are excluded. The list ships as editable JSON config.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from urllib.parse import urlsplit, urlunsplit


def canonical_url(url: str) -> str:
    """Canonical form used for deduplication: lowercase scheme/host, no fragment."""
    parts = urlsplit(url.strip())
    host = parts.netloc.lower()
    path = parts.path.rstrip("/") or "/"
    return urlunsplit((parts.scheme.lower(), host, path, parts.query, ""))


def _host(url: str) -> str:
    host = urlsplit(url).netloc.lower()
    if "@" in host:
        host = host.rsplit("@", 1)[1]
    return host.split(":")[0]


class SourceFilter:
    """Blocks results whose host matches a configured domain pattern.

    A pattern matches the domain itself and any subdomain.
    """

    def __init__(self, blocked_domains: list[str] | None = None):
        if blocked_domains is None:
            blocked_domains = load_default_blocklist()
        self.blocked_domains = [d.strip().lower().lstrip(".") for d in blocked_domains if d.strip()]

    def is_blocked(self, url: str) -> bool:
        host = _host(url)
        if not host:
            return True
        for domain in self.blocked_domains:
            if host == domain or host.endswith("." + domain):
                return True
        return False

    def allows(self, url: str) -> bool:
        return not self.is_blocked(url)


def load_default_blocklist() -> list[str]:
    ref = resources.files("roundtable").joinpath("data/blocklist.json")
    with ref.open("r", encoding="utf-8") as fh:
        return json.load(fh)["blocked_domains"]


def load_blocklist(path: str | Path) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)["blocked_domains"]
