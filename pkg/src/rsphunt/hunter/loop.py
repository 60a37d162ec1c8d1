"""The snowballing hunt: query, keep reflecting results, classify, and grow the frontiers."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from ..errors import AdapterError, FetchError, MalformedUrlError, RspError
from ..extract.keywords import extract_keywords
from ..lang import tag_language
from ..records import IptRecord, ReflectionFinding, SearchResultEntry
from ..reflection import canonicalize_urs, detect_reflection, site_prefix
from .adapters import Capabilities
from .ratelimit import RateGovernor, RateLimitPolicy, RealClock

log = logging.getLogger(__name__)

URS_KEYWORD_VARIANTS = ("url", "tg", "telegram", "微", "薇", "扣", "qq", "飞机")

PageFetcher = Callable[[str], Mapping[str, str]]


@dataclass
class HuntState:
    round: int = 0
    keyword_frontier: list[str] = field(default_factory=list)
    urs_frontier: list[str] = field(default_factory=list)
    known_ipt_ids: set[str] = field(default_factory=set)
    known_urs_templates: set[str] = field(default_factory=set)
    known_keywords: set[str] = field(default_factory=set)
    issued: set[tuple[str, str]] = field(default_factory=set)

    @classmethod
    def seeded(cls, keywords: Iterable[str] = (), urs_templates: Iterable[str] = ()) -> HuntState:
        return cls(keyword_frontier=_unique(keywords), urs_frontier=_unique(urs_templates))

    def validate(self) -> None:
        if set(self.keyword_frontier) & self.known_keywords:
            raise ValueError("keyword frontier overlaps known keywords")
        if set(self.urs_frontier) & self.known_urs_templates:
            raise ValueError("URS frontier overlaps known URS templates")
        if self.round < 0:
            raise ValueError("round must be non-negative")

    @property
    def frontier_empty(self) -> bool:
        return not self.keyword_frontier and not self.urs_frontier

    def to_json(self) -> dict:
        return {
            "round": self.round,
            "keyword_frontier": list(self.keyword_frontier),
            "urs_frontier": list(self.urs_frontier),
            "known_ipt_ids": sorted(self.known_ipt_ids),
            "known_urs_templates": sorted(self.known_urs_templates),
            "known_keywords": sorted(self.known_keywords),
            "issued": sorted([a, q] for a, q in self.issued),
        }

    @classmethod
    def from_json(cls, d: dict) -> HuntState:
        return cls(
            round=d["round"],
            keyword_frontier=list(d["keyword_frontier"]),
            urs_frontier=list(d["urs_frontier"]),
            known_ipt_ids=set(d["known_ipt_ids"]),
            known_urs_templates=set(d["known_urs_templates"]),
            known_keywords=set(d["known_keywords"]),
            issued={(a, q) for a, q in d["issued"]},
        )


@dataclass
class RoundSummary:
    round: int
    queries: int = 0
    entries: int = 0
    reflections: int = 0
    new_ipts: int = 0
    new_keywords: int = 0
    new_urs: int = 0
    known_ipts: int = 0
    known_urs: int = 0
    errors: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def _unique(items: Iterable[str]) -> list[str]:
    out, seen = [], set()
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def urs_queries(template: str) -> list[str]:
    prefix = site_prefix(template)
    return [f"site:{prefix}"] + [f"site:{prefix} {kw}" for kw in URS_KEYWORD_VARIANTS]


def build_queries(state: HuntState, capabilities: Capabilities) -> list[str]:
    """Keyword frontier verbatim, then ``site:`` queries for the URS frontier when supported."""
    queries = list(state.keyword_frontier)
    if capabilities.supports_site_filter:
        for template in state.urs_frontier:
            queries += urs_queries(template)
    return _unique(queries)


def filter_reflection_entries(
    entries: Sequence[SearchResultEntry],
    fetcher: PageFetcher | None = None,
    errors: list[str] | None = None,
) -> list[tuple[SearchResultEntry, ReflectionFinding]]:
    """Entries whose URL parameter values are rendered in the result or its page.

    The entry's own title and snippet are always checked. With a ``fetcher``,
    the page text it returns is checked too; an entry whose fetch fails is
    skipped and the failure noted in ``errors``.
    """
    out = []
    for entry in entries:
        texts = {"title": entry.title, "snippet": entry.snippet}
        if fetcher is not None:
            try:
                page = fetcher(entry.url)
            except (FetchError, OSError) as exc:
                if errors is not None:
                    errors.append(f"fetch {entry.url}: {exc}")
                continue
            for loc, text in page.items():
                texts[loc] = f"{texts[loc]}\n{text}" if loc in texts else text
        try:
            finding = detect_reflection(entry, texts)
        except MalformedUrlError as exc:
            if errors is not None:
                errors.append(str(exc))
            continue
        if finding is not None:
            out.append((entry, finding))
    return out


def _is_ipt(models, texts: list[str]) -> list[bool]:
    if not texts:
        return []
    if hasattr(models, "is_ipt"):
        return list(models.is_ipt(texts))
    if callable(models):
        return [bool(models(t)) for t in texts]
    return [bool(p == 1) for p in models.predict(texts)]


def _segment_model(models):
    return getattr(models, "segment", models)


def hunt_round(
    state: HuntState,
    adapters: Sequence,
    models,
    store,
    governors: Mapping[str, RateGovernor] | None = None,
    clock=None,
    max_queries: int | None = None,
    language_identifier: Callable[[str], str] = tag_language,
) -> tuple[HuntState, RoundSummary]:
    """One snowball round; returns the next state and a summary of what was found.

    Frontier items are consumed FIFO. With a ``max_queries`` budget, items whose
    queries could not all be issued stay on the frontier for the next round.
    """
    clock = clock or RealClock()
    governors = dict(governors or {})
    summary = RoundSummary(round=state.round + 1)
    issued = set(state.issued)
    budget = max_queries if max_queries is not None else float("inf")

    # (reflected text, entry, finding) in discovery order
    candidates: list[tuple[str, SearchResultEntry, ReflectionFinding]] = []
    consumed_kw: list[str] = []
    consumed_urs: list[str] = []
    exhausted = False

    items = [("kw", k, [k]) for k in state.keyword_frontier]
    items += [("urs", t, urs_queries(t)) for t in state.urs_frontier]
    for item_kind, item, queries in items:
        for adapter in adapters:
            if item_kind == "urs" and not adapter.capabilities.supports_site_filter:
                continue
            governor = governors.setdefault(adapter.id, RateGovernor(RateLimitPolicy(), clock))
            fetcher = getattr(adapter, "fetch_page", None)
            for q in queries:
                if (adapter.id, q) in issued:
                    continue
                if summary.queries >= budget:
                    exhausted = True
                    break
                issued.add((adapter.id, q))
                summary.queries += 1
                try:
                    entries = governor.call(lambda: adapter.query(q))
                except (AdapterError, RspError) as exc:
                    summary.errors.append(f"{adapter.id} {q!r}: {exc}")
                    log.warning("query failed on %s: %s", adapter.id, exc)
                    continue
                summary.entries += len(entries)
                for entry, finding in filter_reflection_entries(entries, fetcher, summary.errors):
                    candidates.append((finding.reflected_params[0].value, entry, finding))
            if exhausted:
                break
        if exhausted:
            break
        (consumed_kw if item_kind == "kw" else consumed_urs).append(item)

    summary.reflections = len(candidates)
    verdicts = _is_ipt(models, [text for text, _, _ in candidates])
    known_ipts = set(state.known_ipt_ids)
    new_records: dict[str, IptRecord] = {}
    found_urs: list[str] = []
    now = clock.now()
    for (text, entry, finding), positive in zip(candidates, verdicts):
        if not positive:
            continue
        record = IptRecord.new(
            text,
            seen_at=now,
            sources=((entry.engine.value, entry.url),),
            language=language_identifier(text),
        )
        store.append(record)
        try:
            urs = canonicalize_urs(finding)
        except MalformedUrlError as exc:
            summary.errors.append(str(exc))
        else:
            store.append(urs)
            found_urs.append(urs.template)
        if record.id not in known_ipts and record.id not in new_records:
            new_records[record.id] = record

    found_kw: list[str] = []
    seg_model = _segment_model(models)
    for record in new_records.values():
        found_kw += extract_keywords(record, seg_model)

    known_kw = state.known_keywords | set(consumed_kw)
    known_urs = state.known_urs_templates | set(consumed_urs)
    keep_kw = [k for k in state.keyword_frontier if k not in consumed_kw]
    keep_urs = [t for t in state.urs_frontier if t not in consumed_urs]
    next_kw = _unique(keep_kw + [k for k in found_kw if k not in known_kw])
    next_urs = _unique(keep_urs + [t for t in found_urs if t not in known_urs])

    summary.new_ipts = len(new_records)
    summary.new_keywords = len(set(next_kw) - set(state.keyword_frontier))
    summary.new_urs = len(set(next_urs) - set(state.urs_frontier))
    known_ipts |= set(new_records)
    summary.known_ipts = len(known_ipts)
    summary.known_urs = len(known_urs | set(next_urs))
    nxt = HuntState(
        round=state.round + 1,
        keyword_frontier=next_kw,
        urs_frontier=next_urs,
        known_ipt_ids=known_ipts,
        known_urs_templates=known_urs,
        known_keywords=known_kw,
        issued=issued,
    )
    log.info(
        "round %d: %d queries, %d reflections, %d new IPTs, frontier %d kw / %d urs",
        nxt.round, summary.queries, summary.reflections, summary.new_ipts, len(next_kw), len(next_urs),
    )
    return nxt, summary


@dataclass
class SnowballLimits:
    max_rounds: int = 6
    max_queries: int = 10_000

    def __post_init__(self):
        if self.max_rounds < 0 or self.max_queries < 0:
            raise ValueError("limits must be non-negative")


def snowball_run(
    seed_keywords: Iterable[str],
    seed_urs: Iterable[str],
    adapters: Sequence,
    models,
    store,
    limits: SnowballLimits | None = None,
    governors: Mapping[str, RateGovernor] | None = None,
    clock=None,
    state: HuntState | None = None,
) -> tuple[HuntState, list[RoundSummary]]:
    """Run rounds until the frontier empties or a limit is hit.

    Passing a saved ``state`` resumes a previous run (its seeds are ignored).
    """
    limits = limits or SnowballLimits()
    if state is None:
        state = HuntState.seeded(seed_keywords, seed_urs)
        if state.frontier_empty:
            raise ValueError("snowball_run needs at least one seed keyword or URS")
    governors = dict(governors or {})
    summaries: list[RoundSummary] = []
    used = 0
    while len(summaries) < limits.max_rounds and not state.frontier_empty and used < limits.max_queries:
        state, summary = hunt_round(
            state, adapters, models, store, governors=governors, clock=clock,
            max_queries=limits.max_queries - used,
        )
        used += summary.queries
        summaries.append(summary)
    return state, summaries


def exposure_probe(
    keywords: Sequence[str],
    adapter,
    k_levels: Sequence[int],
    model,
    errors: list[str] | None = None,
) -> list[tuple[int, float, int]]:
    """``(k, % of keywords with an IPT in the top k, IPT entries in the top k)`` per k.

    Entry titles are classified with ``model``. Keywords whose query fails are
    skipped, reported through ``errors`` and left out of the denominator.
    """
    k_levels = list(k_levels)
    if k_levels != sorted(k_levels) or any(k < 1 for k in k_levels):
        raise ValueError("k_levels must be positive and sorted ascending")
    first_hit: list[int | None] = []
    ipt_ranks: list[list[int]] = []
    for kw in keywords:
        try:
            entries = adapter.query(kw)
        except RspError as exc:
            if errors is not None:
                errors.append(f"{kw!r}: {exc}")
            continue
        verdicts = _is_ipt(model, [e.title for e in entries])
        ranks = [e.rank for e, v in zip(entries, verdicts) if v]
        ipt_ranks.append(ranks)
        first_hit.append(min(ranks) if ranks else None)
    n = len(first_hit)
    table = []
    for k in k_levels:
        poisoned = sum(1 for r in first_hit if r is not None and r <= k)
        count = sum(1 for ranks in ipt_ranks for r in ranks if r <= k)
        table.append((k, 100.0 * poisoned / n if n else 0.0, count))
    return table
