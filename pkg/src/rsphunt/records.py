"""Canonical domain types and text identity.

Every persisted type is a frozen dataclass with ``to_json``/``from_json`` that
round-trip through plain JSON objects whose keys are the dataclass field names.
"""

from __future__ import annotations

import enum
import hashlib
import re
import unicodedata
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from typing import Any, ClassVar
from urllib.parse import urlsplit

from .errors import InvariantViolation
from .grammars import is_valid_contact


class Engine(str, enum.Enum):
    GOOGLE = "google"
    BING = "bing"
    BAIDU = "baidu"
    SOGOU = "sogou"
    MOCK = "mock"


class CategoryLabel(str, enum.Enum):
    BLACKHAT_SEO = "Black Hat SEO & Advertisement"
    HACKING = "Hacking Service"
    COUNTERFEIT = "Counterfeit Goods"
    DRUGS = "Drug Sales"
    DATA_THEFT = "Data Theft"
    SEX = "Sex Service"
    FAKE_ACCOUNT = "Fake Account"
    SURROGACY = "Surrogacy Service"
    FAKE_CERTIFICATE = "Fake Certificate"
    WEAPONS = "Weapon Sales"
    FINANCIAL_FRAUD = "Financial Fraud"
    MONEY_LAUNDERING = "Money Laundering"
    GAMBLING = "Gambling"
    OTHERS = "Others"
    BENIGN = "Benign"

    @property
    def illicit(self) -> bool:
        return self is not CategoryLabel.BENIGN


ILLICIT_LABELS: tuple[CategoryLabel, ...] = tuple(c for c in CategoryLabel if c.illicit)


class ContactKind(str, enum.Enum):
    WEBSITE = "Website"
    TELEGRAM = "Telegram"
    WECHAT = "WeChat"
    QQ = "QQ"
    PHONE = "Phone"
    OTHER = "Other"


class Location(str, enum.Enum):
    TITLE = "title"
    SNIPPET = "snippet"
    BODY_TEXT = "body_text"
    METADATA = "metadata"
    SCRIPT_VAR = "script_var"
    ANCHOR = "anchor"
    DATA_ATTR = "data_attr"


class Mechanism(str, enum.Enum):
    INITIAL = "initial"
    HTTP_3XX = "http_3xx"
    META_REFRESH = "meta_refresh"
    JS_LOCATION = "js_location"


# ---------------------------------------------------------------------------
# identity helpers

_WS_RUN = re.compile(r"\s+")


def normalize_ipt_text(raw: str) -> str:
    """NFKC-fold ``raw``, collapse whitespace runs to one space and trim."""
    folded = unicodedata.normalize("NFKC", raw)
    return _WS_RUN.sub(" ", folded).strip()


def digest(text: str) -> str:
    """128-bit stable content hash as lowercase hex."""
    return hashlib.blake2b(text.encode("utf-8"), digest_size=16).hexdigest()


def ipt_id(normalized_text: str) -> str:
    return digest(normalized_text)


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


def to_iso(ts: datetime) -> str:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def from_iso(value: str) -> datetime:
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    ts = datetime.fromisoformat(value)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def _is_http_url(url: str) -> bool:
    try:
        parts = urlsplit(url)
    except ValueError:
        return False
    return parts.scheme in ("http", "https") and bool(parts.hostname)


# ---------------------------------------------------------------------------
# search / IPT records


@dataclass(frozen=True)
class SearchResultEntry:
    kind: ClassVar[str] = "serp"

    engine: Engine
    query: str
    rank: int
    url: str
    title: str
    snippet: str
    fetched_at: datetime

    @property
    def id(self) -> str:
        return digest("\x1f".join([self.engine.value, self.query, str(self.rank), self.url]))

    def validate(self) -> None:
        if not isinstance(self.engine, Engine):
            raise InvariantViolation("engine is a declared adapter id", repr(self.engine))
        if not isinstance(self.rank, int) or self.rank < 1:
            raise InvariantViolation("rank >= 1", f"rank={self.rank!r}")
        if not _is_http_url(self.url):
            raise InvariantViolation("url is an absolute http(s) URL", self.url)

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "engine": self.engine.value,
            "query": self.query,
            "rank": self.rank,
            "url": self.url,
            "title": self.title,
            "snippet": self.snippet,
            "fetched_at": to_iso(self.fetched_at),
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> SearchResultEntry:
        return cls(
            engine=Engine(d["engine"]),
            query=d["query"],
            rank=d["rank"],
            url=d["url"],
            title=d["title"],
            snippet=d["snippet"],
            fetched_at=from_iso(d["fetched_at"]),
        )


@dataclass(frozen=True)
class Contact:
    kind: ClassVar[str] = "contact"

    contact_kind: ContactKind
    value: str
    raw_span: tuple[int, int]
    source_ipt: str

    @property
    def id(self) -> str:
        return digest("\x1f".join([self.contact_kind.value, self.value, self.source_ipt]))

    def validate(self, text: str | None = None) -> None:
        if not is_valid_contact(self.contact_kind.value, self.value):
            raise InvariantViolation(
                "value satisfies the kind-specific grammar", f"{self.contact_kind.value}:{self.value}"
            )
        start, end = self.raw_span
        if start < 0 or end < start or (text is not None and end > len(text)):
            raise InvariantViolation("raw_span within text bounds", repr(self.raw_span))

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.contact_kind.value,
            "value": self.value,
            "raw_span": list(self.raw_span),
            "source_ipt": self.source_ipt,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> Contact:
        return cls(ContactKind(d["kind"]), d["value"], tuple(d["raw_span"]), d["source_ipt"])


@dataclass(frozen=True)
class IptRecord:
    kind: ClassVar[str] = "ipt"

    id: str
    text: str
    normalized_text: str
    language: str
    categories: frozenset[CategoryLabel]
    contacts: tuple[Contact, ...]
    sources: tuple[tuple[str, str], ...]
    first_seen: datetime
    last_seen: datetime

    @classmethod
    def new(
        cls,
        text: str,
        seen_at: datetime,
        sources: tuple[tuple[str, str], ...] = (),
        language: str = "und",
        categories: frozenset[CategoryLabel] = frozenset(),
        contacts: tuple[Contact, ...] = (),
    ) -> IptRecord:
        norm = normalize_ipt_text(text)
        return cls(
            id=ipt_id(norm),
            text=text,
            normalized_text=norm,
            language=language,
            categories=frozenset(categories),
            contacts=tuple(contacts),
            sources=tuple(sources),
            first_seen=seen_at,
            last_seen=seen_at,
        )

    def validate(self) -> None:
        if self.id != ipt_id(self.normalized_text):
            raise InvariantViolation("id is the digest of normalized_text")
        if self.normalized_text != normalize_ipt_text(self.text):
            raise InvariantViolation("normalized_text = normalize_ipt_text(text)")
        if not self.sources:
            raise InvariantViolation("sources non-empty for persisted records")
        if self.first_seen > self.last_seen:
            raise InvariantViolation("first_seen <= last_seen")
        if CategoryLabel.BENIGN in self.categories and len(self.categories) > 1:
            raise InvariantViolation("Benign is exclusive of illicit labels")
        for c in self.contacts:
            c.validate(self.text)

    def merged_with(self, newer: IptRecord) -> IptRecord:
        """Combine a re-observation of the same IPT into this record."""
        sources = list(self.sources)
        for s in newer.sources:
            if s not in sources:
                sources.append(s)
        return replace(
            self,
            sources=tuple(sources),
            first_seen=min(self.first_seen, newer.first_seen),
            last_seen=max(self.last_seen, newer.last_seen),
            language=newer.language if newer.language != "und" else self.language,
            categories=newer.categories or self.categories,
            contacts=newer.contacts or self.contacts,
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "text": self.text,
            "normalized_text": self.normalized_text,
            "language": self.language,
            "categories": sorted(c.value for c in self.categories),
            "contacts": [c.to_json() for c in self.contacts],
            "sources": [list(s) for s in self.sources],
            "first_seen": to_iso(self.first_seen),
            "last_seen": to_iso(self.last_seen),
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> IptRecord:
        return cls(
            id=d["id"],
            text=d["text"],
            normalized_text=d["normalized_text"],
            language=d["language"],
            categories=frozenset(CategoryLabel(c) for c in d["categories"]),
            contacts=tuple(Contact.from_json(c) for c in d["contacts"]),
            sources=tuple(tuple(s) for s in d["sources"]),
            first_seen=from_iso(d["first_seen"]),
            last_seen=from_iso(d["last_seen"]),
        )


# ---------------------------------------------------------------------------
# reflection


@dataclass(frozen=True)
class ReflectedParam:
    name: str
    value: str
    location: Location


@dataclass(frozen=True)
class ReflectionFinding:
    url: str
    reflected_params: tuple[ReflectedParam, ...]

    def validate(self, page_text_by_location: dict[str, str]) -> None:
        if not self.reflected_params:
            raise InvariantViolation("reflected_params non-empty")
        for p in self.reflected_params:
            if p.value not in page_text_by_location.get(p.location.value, ""):
                raise InvariantViolation("reflected value appears at its location", p.name)


URS_SLOT = "{R}"


@dataclass(frozen=True)
class UrlReflectionScheme:
    kind: ClassVar[str] = "urs"

    template: str
    fqdn: str
    apex_domain: str
    reflection_param: str | int

    @property
    def id(self) -> str:
        return digest(self.template)

    def validate(self) -> None:
        if self.template.count(URS_SLOT) != 1:
            raise InvariantViolation("template contains exactly one {R}", self.template)
        host = urlsplit(self.template.replace(URS_SLOT, "x")).hostname or ""
        if host != self.fqdn:
            raise InvariantViolation("fqdn is the host of template", self.fqdn)

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "template": self.template,
            "fqdn": self.fqdn,
            "apex_domain": self.apex_domain,
            "reflection_param": self.reflection_param,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> UrlReflectionScheme:
        return cls(d["template"], d["fqdn"], d["apex_domain"], d["reflection_param"])


# ---------------------------------------------------------------------------
# infiltration


@dataclass(frozen=True)
class RedirectHop:
    url: str
    fqdn: str
    mechanism: Mechanism
    status: int | None


@dataclass(frozen=True)
class RedirectChain:
    hops: tuple[RedirectHop, ...]
    loop: bool = False
    truncated: bool = False
    error: str | None = None

    @property
    def distinct_fqdn_count(self) -> int:
        return len({h.fqdn for h in self.hops})

    @property
    def landing(self) -> RedirectHop:
        return self.hops[-1]

    @property
    def partial(self) -> bool:
        return self.error is not None

    def to_json(self) -> dict[str, Any]:
        return {
            "hops": [
                {"url": h.url, "fqdn": h.fqdn, "mechanism": h.mechanism.value, "status": h.status}
                for h in self.hops
            ],
            "distinct_fqdn_count": self.distinct_fqdn_count,
            "loop": self.loop,
            "truncated": self.truncated,
            "error": self.error,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> RedirectChain:
        hops = tuple(
            RedirectHop(h["url"], h["fqdn"], Mechanism(h["mechanism"]), h["status"]) for h in d["hops"]
        )
        return cls(hops, d.get("loop", False), d.get("truncated", False), d.get("error"))


@dataclass(frozen=True)
class SiteSnapshot:
    kind: ClassVar[str] = "snapshot"

    website: str
    taken_at: datetime
    vantage: str
    chain: RedirectChain
    landing_fqdn: str
    content_digest: str | None
    iframe_sources: tuple[str, ...] = ()
    blocked: bool = False
    block_evidence: str | None = None
    unreachable: bool = False

    @property
    def id(self) -> str:
        return digest("\x1f".join([self.website, self.vantage, to_iso(self.taken_at)]))

    @property
    def landing_url(self) -> str:
        return self.chain.landing.url

    @property
    def landing_status(self) -> int | None:
        return self.chain.landing.status

    def validate(self) -> None:
        if self.landing_fqdn != self.chain.landing.fqdn:
            raise InvariantViolation("landing_fqdn = last hop fqdn")
        if self.blocked and not self.block_evidence:
            raise InvariantViolation("blocked implies recorded evidence")

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "website": self.website,
            "taken_at": to_iso(self.taken_at),
            "vantage": self.vantage,
            "chain": self.chain.to_json(),
            "landing_fqdn": self.landing_fqdn,
            "content_digest": self.content_digest,
            "iframe_sources": list(self.iframe_sources),
            "blocked": self.blocked,
            "block_evidence": self.block_evidence,
            "unreachable": self.unreachable,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> SiteSnapshot:
        return cls(
            website=d["website"],
            taken_at=from_iso(d["taken_at"]),
            vantage=d["vantage"],
            chain=RedirectChain.from_json(d["chain"]),
            landing_fqdn=d["landing_fqdn"],
            content_digest=d["content_digest"],
            iframe_sources=tuple(d["iframe_sources"]),
            blocked=d["blocked"],
            block_evidence=d.get("block_evidence"),
            unreachable=d.get("unreachable", False),
        )


class TelegramKind(str, enum.Enum):
    USER = "user"
    BOT = "bot"
    CHANNEL = "channel"
    GROUP = "group"


@dataclass(frozen=True)
class TelegramAccountProfile:
    kind: ClassVar[str] = "tg_profile"

    handle: str
    account_kind: TelegramKind
    subscriber_or_member_count: int | None
    fetched_at: datetime
    title: str = ""

    @property
    def id(self) -> str:
        return digest("\x1f".join([self.handle, to_iso(self.fetched_at)]))

    def validate(self) -> None:
        if self.subscriber_or_member_count is not None and self.subscriber_or_member_count < 0:
            raise InvariantViolation("counts >= 0 when known")

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "handle": self.handle,
            "kind": self.account_kind.value,
            "subscriber_or_member_count": self.subscriber_or_member_count,
            "fetched_at": to_iso(self.fetched_at),
            "title": self.title,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> TelegramAccountProfile:
        return cls(
            d["handle"],
            TelegramKind(d["kind"]),
            d["subscriber_or_member_count"],
            from_iso(d["fetched_at"]),
            d.get("title", ""),
        )


@dataclass(frozen=True)
class TelegramMessage:
    kind: ClassVar[str] = "tg_message"

    handle: str
    message_id: int
    timestamp: datetime
    text: str

    @property
    def id(self) -> str:
        return f"{self.handle}:{self.message_id}"

    def validate(self) -> None:
        if self.message_id < 0:
            raise InvariantViolation("message_id >= 0")

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "handle": self.handle,
            "message_id": self.message_id,
            "timestamp": to_iso(self.timestamp),
            "text": self.text,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> TelegramMessage:
        return cls(d["handle"], d["message_id"], from_iso(d["timestamp"]), d["text"])


RECORD_TYPES: dict[str, type] = {
    t.kind: t
    for t in (
        SearchResultEntry,
        IptRecord,
        Contact,
        UrlReflectionScheme,
        SiteSnapshot,
        TelegramAccountProfile,
        TelegramMessage,
    )
}

__all__ = [
    "CategoryLabel",
    "Contact",
    "ContactKind",
    "Engine",
    "ILLICIT_LABELS",
    "IptRecord",
    "Location",
    "Mechanism",
    "RECORD_TYPES",
    "RedirectChain",
    "RedirectHop",
    "ReflectedParam",
    "ReflectionFinding",
    "SearchResultEntry",
    "SiteSnapshot",
    "TelegramAccountProfile",
    "TelegramKind",
    "TelegramMessage",
    "URS_SLOT",
    "UrlReflectionScheme",
    "digest",
    "from_iso",
    "ipt_id",
    "normalize_ipt_text",
    "to_iso",
    "utcnow",
]
