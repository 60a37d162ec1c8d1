"""Run configuration loaded from TOML.

Example::

    [store]
    path = "store"

    [models]
    dir = "models"

    [clock]
    fixed = "2024-03-01T00:00:00Z"   # omit for wall-clock time

    [hunt]
    max_rounds = 6
    max_queries = 2000

    [rate_limit]
    tokens_per_interval = 10
    interval = 60.0
    backoff_on_limit = 30.0

    [[adapters]]
    id = "mock"
    kind = "mock"
    corpus = "serp_corpus.jsonl"
    supports_site_filter = true
    max_results_per_query = 100

    [fetch]
    backend = "mock"          # or "http"
    scenario = "scenario.json"
    vantages = ["default"]
    proxies = {}              # vantage -> proxy URL for the http backend

    [telegram]
    fixtures = "tg_fixtures"

Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import tomli

from .errors import ConfigError
from .hunter.ratelimit import RateLimitPolicy, RealClock, VirtualClock
from .records import from_iso


@dataclass
class AdapterConfig:
    id: str
    kind: str = "mock"
    corpus: Path | None = None
    engine: str = "mock"
    supports_site_filter: bool = True
    max_results_per_query: int = 100
    enabled: bool = False


@dataclass
class Config:
    store_path: Path = Path("store")
    models_dir: Path = Path("models")
    fixed_clock: str | None = None
    max_rounds: int = 6
    max_queries: int = 10_000
    rate_limit: RateLimitPolicy = field(default_factory=RateLimitPolicy)
    adapters: list[AdapterConfig] = field(default_factory=list)
    fetch_backend: str = "mock"
    scenario: Path | None = None
    vantages: list[str] = field(default_factory=lambda: ["default"])
    proxies: dict[str, str] = field(default_factory=dict)
    block_patterns: list[str] | None = None
    telegram_fixtures: Path | None = None
    telegram_epoch: int | None = None
    seed: int = 0

    def clock(self):
        if self.fixed_clock:
            return VirtualClock(from_iso(self.fixed_clock))
        return RealClock()


def _path(base: Path, value) -> Path | None:
    if value in (None, ""):
        return None
    p = Path(value)
    return p if p.is_absolute() else base / p


def _table(data: dict, name: str) -> dict:
    value = data.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"[{name}] must be a table")
    return value


def load_config(path: str | Path | None) -> Config:
    """Parse a TOML config file; ``None`` yields the defaults."""
    if path is None:
        return Config()
    path = Path(path)
    try:
        data = tomli.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    base = path.parent
    cfg = Config()
    store, models, clock = _table(data, "store"), _table(data, "models"), _table(data, "clock")
    hunt, rl, fetch, tg = _table(data, "hunt"), _table(data, "rate_limit"), _table(data, "fetch"), _table(data, "telegram")
    try:
        cfg.store_path = _path(base, store.get("path", "store"))
        cfg.models_dir = _path(base, models.get("dir", "models"))
        cfg.fixed_clock = clock.get("fixed")
        if cfg.fixed_clock:
            from_iso(cfg.fixed_clock)
        cfg.seed = int(data.get("seed", 0))
        cfg.max_rounds = int(hunt.get("max_rounds", cfg.max_rounds))
        cfg.max_queries = int(hunt.get("max_queries", cfg.max_queries))
        cfg.rate_limit = RateLimitPolicy(
            tokens_per_interval=int(rl.get("tokens_per_interval", 10)),
            interval=float(rl.get("interval", 60.0)),
            backoff_on_limit=float(rl.get("backoff_on_limit", 30.0)),
            max_retries=int(rl.get("max_retries", 3)),
        )
        for a in data.get("adapters", []):
            cfg.adapters.append(AdapterConfig(
                id=a["id"],
                kind=a.get("kind", "mock"),
                corpus=_path(base, a.get("corpus")),
                engine=a.get("engine", "mock"),
                supports_site_filter=bool(a.get("supports_site_filter", True)),
                max_results_per_query=int(a.get("max_results_per_query", 100)),
                enabled=bool(a.get("enabled", False)),
            ))
        cfg.fetch_backend = fetch.get("backend", "mock")
        cfg.scenario = _path(base, fetch.get("scenario"))
        cfg.vantages = list(fetch.get("vantages", ["default"]))
        cfg.proxies = dict(fetch.get("proxies", {}))
        cfg.block_patterns = fetch.get("block_patterns")
        cfg.telegram_fixtures = _path(base, tg.get("fixtures"))
        cfg.telegram_epoch = tg.get("epoch")
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad value in {path}: {exc}") from exc
    if cfg.max_rounds < 0 or cfg.max_queries < 0:
        raise ConfigError(f"hunt limits in {path} must be non-negative")
    if cfg.fetch_backend not in ("mock", "http"):
        raise ConfigError(f"fetch.backend must be 'mock' or 'http', got {cfg.fetch_backend!r}")
    return cfg
