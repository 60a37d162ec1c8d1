"""Search-engine adapters: an offline mock engine and stubs for live engines."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol

from ..errors import AdapterError, FetchError
from ..records import Engine, SearchResultEntry
from .ratelimit import RealClock

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Capabilities:
    supports_site_filter: bool
    max_results_per_query: int


class SearchEngineAdapter(Protocol):
    id: str
    engine: Engine
    capabilities: Capabilities

    def query(self, q: str) -> list[SearchResultEntry]: ...


def parse_query(q: str) -> tuple[str | None, str]:
    """Split ``"site:<prefix> keywords"`` into ``(prefix, keywords)``."""
    q = q.strip()
    if q.startswith("site:"):
        head, _, rest = q.partition(" ")
        return head[len("site:"):], rest.strip()
    return None, q


def _strip_scheme(url: str) -> str:
    for scheme in ("https://", "http://"):
        if url.lower().startswith(scheme):
            return url[len(scheme):]
    return url


class MockSearchEngine:
    """Deterministic search over an in-memory corpus.

    Each row holds ``url``, ``title``, ``snippet``, ``body_text_by_location``
    and ``index_terms``. A result matches when its URL starts with the
    ``site:`` prefix (if any) and the keyword occurs in its text or index
    terms. Results rank by descending keyword frequency, then corpus order.
    """

    def __init__(
        self,
        rows: Iterable[dict],
        adapter_id: str = "mock",
        engine: Engine = Engine.MOCK,
        supports_site_filter: bool = True,
        max_results_per_query: int = 100,
        clock=None,
    ):
        self.rows = list(rows)
        self.id = adapter_id
        self.engine = engine
        self.capabilities = Capabilities(supports_site_filter, max_results_per_query)
        self.clock = clock or RealClock()
        self.queries: list[str] = []
        self._by_url = {row["url"]: row for row in self.rows}
        self._haystacks = [self._haystack(row) for row in self.rows]

    @classmethod
    def from_jsonl(cls, path: str | Path, **kwargs) -> MockSearchEngine:
        rows = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                rows.append(json.loads(line))
        return cls(rows, **kwargs)

    @staticmethod
    def _haystack(row: dict) -> str:
        parts = [row.get("title", ""), row.get("snippet", "")]
        parts += list((row.get("body_text_by_location") or {}).values())
        return "\n".join(parts).lower()

    def _term_frequency(self, i: int, keyword: str) -> int:
        kw = keyword.lower()
        tf = self._haystacks[i].count(kw)
        tf += sum(1 for t in self.rows[i].get("index_terms", ()) if t.lower() == kw)
        return tf

    def query(self, q: str) -> list[SearchResultEntry]:
        self.queries.append(q)
        prefix, keyword = parse_query(q)
        if prefix is not None and not self.capabilities.supports_site_filter:
            raise AdapterError(f"{self.id} does not support site: filters")
        hits = []
        for i, row in enumerate(self.rows):
            if prefix is not None and not _strip_scheme(row["url"]).startswith(_strip_scheme(prefix)):
                continue
            tf = self._term_frequency(i, keyword) if keyword else 0
            if keyword and tf == 0:
                continue
            hits.append((-tf, i))
        hits.sort()
        now = self.clock.now()
        out = []
        for rank, (_, i) in enumerate(hits[: self.capabilities.max_results_per_query], start=1):
            row = self.rows[i]
            out.append(SearchResultEntry(self.engine, q, rank, row["url"], row.get("title", ""), row.get("snippet", ""), now))
        return out

    def fetch_page(self, url: str) -> dict[str, str]:
        """Location-tagged page text for a corpus URL."""
        row = self._by_url.get(url)
        if row is None:
            raise FetchError(f"no page for {url}")
        return dict(row.get("body_text_by_location") or {})


class LiveSearchAdapter:
    """Placeholder for a commercial engine.

    Live querying is disabled unless explicitly enabled in the run config, and
    even then no transport is bundled: subclass and implement ``_search``.
    """

    def __init__(self, engine: Engine, enabled: bool = False, max_results_per_query: int = 100):
        self.engine = engine
        self.id = engine.value
        self.enabled = enabled
        self.capabilities = Capabilities(True, max_results_per_query)

    def query(self, q: str) -> list[SearchResultEntry]:
        if not self.enabled:
            raise AdapterError(f"live adapter {self.id!r} is disabled (set enabled = true in the config)")
        return self._search(q)[: self.capabilities.max_results_per_query]

    def _search(self, q: str) -> list[SearchResultEntry]:
        raise AdapterError(f"live adapter {self.id!r} has no search transport configured")
