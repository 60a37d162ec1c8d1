"""Measurement reports computed from a record store."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from pathlib import Path
from typing import Iterable, Sequence
from urllib.parse import urlsplit

from .domains import apex_domain
from .errors import EmptyStoreError, RankingFileError
from .records import IptRecord, UrlReflectionScheme
from .reflection import match_urs
from .tables import ReportTable, sort_rows

POPULARITY_THRESHOLDS = (100, 1_000, 10_000, 100_000, 1_000_000)
TOP_SHARE_LEVELS = (5, 10)


def _ipts(store) -> list[IptRecord]:
    records = list(store.query("ipt"))
    if not records:
        raise EmptyStoreError("the store holds no IPT records")
    return records


def _label(v) -> str:
    return getattr(v, "value", str(v))


def report_category_distribution(store) -> ReportTable:
    """Share of label assignments per category; a multi-label IPT counts once per label."""
    records = [r for r in _ipts(store) if r.categories]
    if not records:
        raise EmptyStoreError("no classified IPT records (run classify first)")
    counts = Counter(_label(c) for r in records for c in r.categories)
    total = sum(counts.values())
    rows = [[cat, n, 100.0 * n / total] for cat, n in counts.items()]
    return ReportTable(
        "IPT categories",
        ["category", "assignments", "% IPTs"],
        sort_rows(rows, 2),
        provenance=f"{len(records)} classified IPTs, {total} label assignments",
    )


def report_language_distribution(store) -> ReportTable:
    records = _ipts(store)
    counts = Counter(r.language for r in records)
    rows = [[lang, n, 100.0 * n / len(records)] for lang, n in counts.items()]
    return ReportTable("IPT languages", ["language", "IPTs", "% IPTs"], sort_rows(rows, 2),
                       provenance=f"{len(records)} IPTs")


def report_contact_kinds(store) -> ReportTable:
    records = _ipts(store)
    values: dict[str, set] = defaultdict(set)
    ipts: dict[str, set] = defaultdict(set)
    for r in records:
        for c in r.contacts:
            values[c.contact_kind.value].add(c.value)
            ipts[c.contact_kind.value].add(r.id)
    rows = [[k, len(values[k]), len(ipts[k]), 100.0 * len(ipts[k]) / len(records)] for k in values]
    return ReportTable("Contacts by kind", ["kind", "distinct contacts", "IPTs", "% IPTs"], sort_rows(rows, 3),
                       provenance=f"{len(records)} IPTs")


def _host(url: str) -> str:
    try:
        return (urlsplit(url).hostname or "").lower()
    except ValueError:
        return ""


def _source_index(store) -> tuple[list[IptRecord], dict[str, set[str]]]:
    """IPTs plus, for each RSP URL, the ids of IPTs observed at it."""
    records = _ipts(store)
    by_url: dict[str, set[str]] = defaultdict(set)
    for r in records:
        for _, url in r.sources:
            by_url[url].add(r.id)
    return records, by_url


def _urs_of(url: str, schemes: Sequence[UrlReflectionScheme]) -> str:
    host = _host(url)
    for s in schemes:
        if s.fqdn == host and match_urs(s, url) is not None:
            return s.template
    return f"{host} (no URS)"


def _abuse_table(title, key_name, groups: dict[str, tuple[set, set]], n_ipts, n_rsps) -> ReportTable:
    rows = [
        [key, len(ids), 100.0 * len(ids) / n_ipts, len(urls), 100.0 * len(urls) / n_rsps]
        for key, (ids, urls) in groups.items()
    ]
    return ReportTable(title, [key_name, "IPTs", "% IPTs", "RSPs", "% RSPs"], sort_rows(rows, 2),
                       provenance=f"{n_ipts} distinct IPTs over {n_rsps} RSP URLs")


def report_top_abused(
    store, n: int | None = None, share_levels: Sequence[int] = TOP_SHARE_LEVELS
) -> tuple[ReportTable, ReportTable, ReportTable]:
    """Most abused URS templates and apex domains, plus cumulative top-k% URS shares.

    Percentages divide by distinct IPT ids and distinct RSP URLs. ``n`` limits
    the rows shown in the first two tables.
    """
    records, by_url = _source_index(store)
    schemes = list(store.query("urs"))
    n_ipts, n_rsps = len(records), len(by_url)
    by_urs: dict[str, tuple[set, set]] = defaultdict(lambda: (set(), set()))
    by_apex: dict[str, tuple[set, set]] = defaultdict(lambda: (set(), set()))
    for url, ids in by_url.items():
        for groups, key in ((by_urs, _urs_of(url, schemes)), (by_apex, apex_domain(_host(url)))):
            groups[key][0].update(ids)
            groups[key][1].add(url)
    urs_table = _abuse_table("Top abused URSes", "urs", by_urs, n_ipts, n_rsps)
    apex_table = _abuse_table("Top abused apex domains", "apex_domain", by_apex, n_ipts, n_rsps)
    ranked = [row[0] for row in urs_table.rows]
    cum_rows = []
    for k in share_levels:
        top = ranked[: max(1, math.ceil(len(ranked) * k / 100.0))]
        ids = set().union(*(by_urs[t][0] for t in top))
        urls = set().union(*(by_urs[t][1] for t in top))
        cum_rows.append([f"top {k}%", len(top), 100.0 * len(ids) / n_ipts, 100.0 * len(urls) / n_rsps])
    cumulative = ReportTable("Cumulative share of top URSes", ["level", "URSes", "% IPTs", "% RSPs"], cum_rows,
                             provenance=f"{len(ranked)} URSes")
    if n is not None:
        urs_table.rows = urs_table.rows[:n]
        apex_table.rows = apex_table.rows[:n]
    return urs_table, apex_table, cumulative


def load_ranking(path: str | Path) -> dict[str, int]:
    """Apex domain -> rank (1-based line number; blank lines keep their rank slot)."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise RankingFileError(f"cannot read ranking file {path}: {exc}") from exc
    ranks: dict[str, int] = {}
    for i, line in enumerate(lines, start=1):
        domain = line.strip().lower()
        if "," in domain:  # tolerate "rank,domain" lists
            domain = domain.split(",", 1)[1].strip()
        if domain and domain not in ranks:
            ranks[domain] = i
    return ranks


def report_popularity_overlap(
    store, ranking_file: str | Path, thresholds: Iterable[int] = POPULARITY_THRESHOLDS
) -> ReportTable:
    """How many abused apex domains sit in the top-N of a popularity ranking, and their IPT/RSP shares.

    Every threshold yields a row, with zeros when no abused domain ranks within it.
    """
    ranks = load_ranking(ranking_file)
    records, by_url = _source_index(store)
    n_ipts, n_rsps = len(records), len(by_url)
    by_apex: dict[str, tuple[set, set]] = defaultdict(lambda: (set(), set()))
    for url, ids in by_url.items():
        apex = apex_domain(_host(url))
        by_apex[apex][0].update(ids)
        by_apex[apex][1].add(url)
    rows = []
    for t in sorted(thresholds):
        inside = [a for a in by_apex if ranks.get(a, math.inf) <= t]
        ids = set().union(*(by_apex[a][0] for a in inside)) if inside else set()
        urls = set().union(*(by_apex[a][1] for a in inside)) if inside else set()
        rows.append([f"top {t}", len(inside), 100.0 * len(ids) / n_ipts, 100.0 * len(urls) / n_rsps])
    return ReportTable("Abused domains among popular websites", ["threshold", "domains", "% IPTs", "% RSPs"], rows,
                       provenance=f"{len(by_apex)} abused apex domains, ranking of {len(ranks)}")


def report_redirect_lengths(store) -> ReportTable:
    from .infiltrate.sites import redirect_length_table

    snaps = list(store.query("snapshot"))
    if not snaps:
        raise EmptyStoreError("the store holds no site snapshots")
    rows = [[f">= {k}", n, pct] for k, n, pct in redirect_length_table(snaps)]
    return ReportTable("Redirect chain lengths (distinct FQDNs)", ["length", "websites", "% websites"], rows,
                       provenance=f"{len({s.website for s in snaps})} websites")


def report_landing_clusters(store, min_size: int = 2) -> ReportTable:
    from .infiltrate.sites import cluster_by_landing

    snaps = list(store.query("snapshot"))
    if not snaps:
        raise EmptyStoreError("the store holds no site snapshots")
    clusters = cluster_by_landing(snaps)
    rows = []
    for epoch, groups in clusters.clusters.items():
        for fqdn, sites in groups.items():
            if len(sites) >= min_size:
                rows.append([epoch, fqdn, len(sites)])
    rows.sort(key=lambda r: (r[0], -r[2], r[1]))
    return ReportTable("Shared landing clusters", ["epoch", "landing_fqdn", "websites"], rows,
                       provenance=f"clusters of at least {min_size} websites")


REPORT_KINDS = {
    "categories": lambda store, **kw: [report_category_distribution(store)],
    "languages": lambda store, **kw: [report_language_distribution(store)],
    "contacts": lambda store, **kw: [report_contact_kinds(store)],
    "top-abused": lambda store, n=None, **kw: list(report_top_abused(store, n)),
    "popularity": lambda store, ranking=None, **kw: [report_popularity_overlap(store, ranking)],
    "redirects": lambda store, **kw: [report_redirect_lengths(store)],
    "clusters": lambda store, **kw: [report_landing_clusters(store)],
}


def build_report(store, kind: str, fmt: str = "text", **kwargs) -> str:
    if kind not in REPORT_KINDS:
        raise ValueError(f"unknown report kind {kind!r}")
    if kind == "popularity" and not kwargs.get("ranking"):
        raise RankingFileError("the popularity report needs a ranking file (--ranking)")
    tables = REPORT_KINDS[kind](store, **kwargs)
    return "\n".join(t.render(fmt) for t in tables)
