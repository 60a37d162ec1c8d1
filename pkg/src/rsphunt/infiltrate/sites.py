"""Website snapshots and the analyses built on them."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Iterable, Sequence

from ..domains import apex_domain
from ..errors import FetchError, MissingCounterpartError
from ..records import CategoryLabel, SiteSnapshot, digest, utcnow
from .chain import DEFAULT_HOP_CAP, follow_chain
from .fetch import FetchBackend
from .html import iframe_sources, visible_text

log = logging.getLogger(__name__)

BLOCK_STATUSES = frozenset({401, 403, 429, 451})
DEFAULT_BLOCK_PATTERNS = ("access denied", "captcha", "forbidden")
REDIRECT_LENGTH_BUCKETS = (1, 2, 3, 4, 5, 10)


def website_url(website: str) -> str:
    return website if "://" in website else f"http://{website}/"


def normalize_body(body: str) -> str:
    return " ".join(body.split())


def snapshot_site(
    website: str,
    backend: FetchBackend,
    vantage: str | None = None,
    taken_at: datetime | None = None,
    block_patterns: Sequence[str] = DEFAULT_BLOCK_PATTERNS,
    hop_cap: int = DEFAULT_HOP_CAP,
) -> SiteSnapshot:
    """Visit ``website`` once and record where it lands and what the landing page holds."""
    vantage = vantage or getattr(backend, "vantage", "default")
    chain, resp = follow_chain(website_url(website), backend, hop_cap)
    landing = chain.landing
    unreachable = resp is None
    blocked, evidence, content, frames = False, None, None, ()
    if resp is not None:
        content = digest(normalize_body(resp.body))
        frames = tuple(iframe_sources(resp.body, landing.url))
        if resp.status in BLOCK_STATUSES:
            blocked, evidence = True, f"status {resp.status}"
        else:
            low = resp.body.lower()
            hit = next((p for p in block_patterns if p.lower() in low), None)
            if hit is not None:
                blocked, evidence = True, f"pattern {hit!r}"
    return SiteSnapshot(
        website=website,
        taken_at=taken_at or utcnow(),
        vantage=vantage,
        chain=chain,
        landing_fqdn=landing.fqdn,
        content_digest=content,
        iframe_sources=frames,
        blocked=blocked,
        block_evidence=evidence,
        unreachable=unreachable,
    )


@dataclass(frozen=True)
class CloakingFinding:
    website: str
    host_url: str
    iframe_url: str
    iframe_labels: frozenset
    errors: tuple[str, ...] = ()


def _classifier(model):
    ml = getattr(model, "multilabel", model)
    if hasattr(ml, "classify"):
        return ml.classify
    return model


def detect_iframe_cloaking(
    snapshot: SiteSnapshot, backend: FetchBackend, model, errors: list[str] | None = None
) -> CloakingFinding | None:
    """Flag a benign-looking host page whose iframe, on a foreign apex, carries illicit content.

    The host page and each iframe source are fetched once (no redirects
    followed). Per-source fetch failures go to ``errors``.
    """
    if not snapshot.iframe_sources or snapshot.unreachable:
        return None
    classify = _classifier(model)
    errors = errors if errors is not None else []
    host_apex = apex_domain(snapshot.landing_fqdn)
    try:
        host_resp = backend.get(snapshot.landing_url)
    except FetchError as exc:
        errors.append(f"{snapshot.landing_url}: {exc}")
        return None
    host_text = visible_text(host_resp.body)
    host_benign = set(classify(host_text)) == {CategoryLabel.BENIGN}
    for src in snapshot.iframe_sources:
        frame_fqdn = (src.split("://", 1)[-1].split("/", 1)[0].split(":", 1)[0]).lower()
        if apex_domain(frame_fqdn) == host_apex:
            continue
        try:
            resp = backend.get(src)
        except FetchError as exc:
            errors.append(f"{src}: {exc}")
            continue
        labels = frozenset(classify(visible_text(resp.body)))
        if host_benign and any(lab != CategoryLabel.BENIGN for lab in labels):
            return CloakingFinding(snapshot.website, snapshot.landing_url, src, labels, tuple(errors))
    return None


@dataclass(frozen=True)
class VantageReport:
    website: str
    vantages: tuple[str, str]
    divergent: bool
    reasons: tuple[str, ...]
    annotations: tuple[str, ...] = ()


def compare_vantage(
    snapshots: Iterable[SiteSnapshot],
    vantages: tuple[str, str] | None = None,
    window: timedelta = timedelta(hours=24),
) -> VantageReport:
    """Compare the latest snapshots of one website from two vantages taken within ``window``."""
    snaps = list(snapshots)
    websites = {s.website for s in snaps}
    if len(websites) != 1:
        raise ValueError(f"expected snapshots of one website, got {sorted(websites)}")
    if vantages is None:
        vantages = tuple(sorted({s.vantage for s in snaps}))
        if len(vantages) != 2:
            raise MissingCounterpartError(f"need exactly two vantages, found {list(vantages)}")
    latest = {}
    for v in vantages:
        mine = [s for s in snaps if s.vantage == v]
        if not mine:
            raise MissingCounterpartError(f"no snapshot from vantage {v!r}")
        latest[v] = max(mine, key=lambda s: s.taken_at)
    a, b = latest[vantages[0]], latest[vantages[1]]
    if abs(a.taken_at - b.taken_at) > window:
        raise MissingCounterpartError(f"snapshots are {abs(a.taken_at - b.taken_at)} apart (window {window})")
    reasons, notes = [], []
    for s in (a, b):
        if s.blocked:
            reasons.append("blocked")
            notes.append(f"blocked at {s.vantage}: {s.block_evidence}")
        if s.unreachable:
            reasons.append("unreachable")
            notes.append(f"unreachable at {s.vantage}")
    if apex_domain(a.landing_fqdn) != apex_domain(b.landing_fqdn):
        reasons.append("landing apex differs")
    elif a.landing_status == 200 and b.landing_status == 200 and a.content_digest != b.content_digest:
        reasons.append("content digest differs")
    reasons = list(dict.fromkeys(reasons))
    return VantageReport(a.website, tuple(vantages), bool(reasons), tuple(reasons), tuple(notes))


def epoch_of(ts: datetime) -> str:
    year, week, _ = ts.isocalendar()
    return f"{year}-W{week:02d}"


@dataclass
class LandingClusters:
    # epoch -> landing fqdn -> sorted websites
    clusters: dict[str, dict[str, list[str]]] = field(default_factory=dict)
    distinct_landings: dict[str, int] = field(default_factory=dict)

    def largest(self, epoch: str) -> tuple[str, list[str]]:
        fqdn, sites = max(self.clusters[epoch].items(), key=lambda kv: (len(kv[1]), kv[0]))
        return fqdn, sites


def cluster_by_landing(snapshots: Iterable[SiteSnapshot]) -> LandingClusters:
    """Group websites that land on the same FQDN, per ISO-week epoch.

    Within an epoch each website is represented by its latest snapshot, so
    the clusters partition that epoch's websites. ``distinct_landings`` counts
    landing FQDNs per website over every snapshot.
    """
    snaps = list(snapshots)
    if not snaps:
        raise ValueError("no snapshots to cluster")
    latest: dict[tuple[str, str], SiteSnapshot] = {}
    landings: dict[str, set[str]] = defaultdict(set)
    for s in snaps:
        key = (epoch_of(s.taken_at), s.website)
        if key not in latest or (s.taken_at, s.vantage) > (latest[key].taken_at, latest[key].vantage):
            latest[key] = s
        landings[s.website].add(s.landing_fqdn)
    out = LandingClusters()
    for (epoch, website), s in sorted(latest.items()):
        out.clusters.setdefault(epoch, {}).setdefault(s.landing_fqdn, []).append(website)
    out.distinct_landings = {w: len(v) for w, v in sorted(landings.items())}
    return out


def redirect_length_table(
    snapshots: Iterable[SiteSnapshot], buckets: Sequence[int] = REDIRECT_LENGTH_BUCKETS
) -> list[tuple[int, int, float]]:
    """``(k, websites whose chain spans >= k distinct FQDNs, percent)`` using each site's latest snapshot."""
    latest: dict[str, SiteSnapshot] = {}
    for s in snapshots:
        if s.website not in latest or s.taken_at > latest[s.website].taken_at:
            latest[s.website] = s
    lengths = [s.chain.distinct_fqdn_count for s in latest.values() if not s.unreachable]
    n = len(lengths)
    return [(k, sum(1 for x in lengths if x >= k), 100.0 * sum(1 for x in lengths if x >= k) / n if n else 0.0)
            for k in sorted(buckets)]
