"""Contact entity extraction: indicator adjacency plus per-kind validation grammars.

Extraction runs on normalized text (see ``normalize.py``). A token counts as a
QQ, Telegram or WeChat account when it follows an indicator of that kind
within a small window; Telegram handles are also recognised by an ``@``
prefix or a ``t.me/`` link. Phones are bare 7-15 digit runs outside QQ
context, and websites are the hosts found by the URL grammar.
"""

from __future__ import annotations

import logging
import re
from dataclasses import astuple, dataclass, fields
from typing import Iterable

import numpy as np

from ..grammars import QQ_RE, TELEGRAM_RE, WECHAT_RE, is_valid_contact
from ..records import Contact, ContactKind, IptRecord
from ..textfeat import SEPARATOR_PUNCT, _TextFeaturizer
from .normalize import normalize_evasions
from .urls import extract_urls, url_host

log = logging.getLogger(__name__)

INDICATORS: dict[ContactKind, tuple[str, ...]] = {
    ContactKind.QQ: ("qq", "扣扣", "扣微", "企鹅"),
    ContactKind.TELEGRAM: ("telegram", "tg", "纸飞机", "飞机", "电报"),
    ContactKind.WECHAT: ("微信", "v信", "vx", "wx", "wechat", "weixin", "威信", "微", "薇"),
}
ADJACENCY_WINDOW = 3
# link hosts that carry a messaging handle rather than a seller website
MESSAGING_LINK_HOSTS = frozenset({"t.me", "telegram.me", "telegram.dog"})
# skipped for free between an indicator and its token
_GAP_CHARS = frozenset(SEPARATOR_PUNCT) | frozenset("：:@＠=＝ \t")
_TOKEN_RUN = {
    ContactKind.QQ: re.compile(r"[0-9]+"),
    ContactKind.TELEGRAM: re.compile(r"[A-Za-z0-9_]+"),
    ContactKind.WECHAT: re.compile(r"[A-Za-z0-9_-]+"),
}
_GRAMMAR = {
    ContactKind.QQ: QQ_RE,
    ContactKind.TELEGRAM: TELEGRAM_RE,
    ContactKind.WECHAT: WECHAT_RE,
}
_AT_HANDLE_RE = re.compile(r"(?<![A-Za-z0-9._\-])@([A-Za-z0-9_]+)")
_TME_RE = re.compile(r"(?<![A-Za-z0-9.\-])(?:https?://)?t\.me/([A-Za-z0-9_]+)", re.IGNORECASE)
_PHONE_SCAN_RE = re.compile(r"(?<![A-Za-z0-9_+])\+?[0-9]{7,15}(?![A-Za-z0-9_])")

_ALL_INDICATORS = sorted(
    ((tok, kind) for kind, toks in INDICATORS.items() for tok in toks),
    key=lambda item: -len(item[0]),
)


def _is_ascii_alnum(ch: str) -> bool:
    return ch.isascii() and ch.isalnum()


def find_indicators(text: str) -> list[tuple[ContactKind, int, int]]:
    """Indicator occurrences as ``(kind, start, end)``; longest match wins at each position.

    ASCII indicators must not continue a preceding ASCII word (``"stg"`` is
    not a Telegram indicator).
    """
    low = text.lower()
    out = []
    i = 0
    while i < len(low):
        for tok, kind in _ALL_INDICATORS:
            if low.startswith(tok, i):
                if tok.isascii() and i > 0 and _is_ascii_alnum(low[i - 1]):
                    continue
                out.append((kind, i, i + len(tok)))
                i += len(tok)
                break
        else:
            i += 1
    return out


def _adjacent_token(text: str, pos: int, kind: ContactKind) -> tuple[str, int, int] | None:
    """The token run after an indicator ending at ``pos``, if it starts within the window."""
    other = 0
    i = pos
    while i < len(text):
        ch = text[i]
        if _is_ascii_alnum(ch):
            break
        if ch in _GAP_CHARS or ch.isspace():
            i += 1
            continue
        other += 1
        if other > ADJACENCY_WINDOW:
            return None
        i += 1
    else:
        return None
    m = _TOKEN_RUN[kind].match(text, i)
    if m is None:
        return None
    # a token glued to more ASCII word characters is not a clean run
    if m.end() < len(text) and _is_ascii_alnum(text[m.end()]):
        return None
    return m.group(), m.start(), m.end()


def _indicator_candidates(text: str, kind: ContactKind) -> list[tuple[str, int, int]]:
    out = []
    for k, _, end in find_indicators(text):
        if k != kind:
            continue
        tok = _adjacent_token(text, end, kind)
        if tok is not None and _GRAMMAR[kind].match(tok[0]):
            out.append(tok)
    return out


def _qq_spans(text: str) -> set[tuple[int, int]]:
    return {(s, e) for _, s, e in _indicator_candidates(text, ContactKind.QQ)}


def _candidates(text: str, kind: ContactKind) -> list[tuple[str, int, int]]:
    if kind == ContactKind.WEBSITE:
        hosts = [(url_host(u), s, s + len(u)) for u, (s, _) in extract_urls(text)]
        return [h for h in hosts if h[0] not in MESSAGING_LINK_HOSTS]
    if kind == ContactKind.PHONE:
        qq = _qq_spans(text)
        urls = [span for _, span in extract_urls(text)]
        out = []
        for m in _PHONE_SCAN_RE.finditer(text):
            digits_span = (m.start() + (m.group().startswith("+")), m.end())
            if digits_span in qq or any(s <= m.start() < e for s, e in urls):
                continue
            out.append((m.group(), m.start(), m.end()))
        return out
    if kind == ContactKind.TELEGRAM:
        found = _indicator_candidates(text, kind)
        for rx in (_AT_HANDLE_RE, _TME_RE):
            for m in rx.finditer(text):
                if TELEGRAM_RE.match(m.group(1)):
                    found.append((m.group(1), m.start(1), m.end(1)))
        return sorted(found, key=lambda t: t[1])
    if kind in _GRAMMAR:
        return _indicator_candidates(text, kind)
    return []


def _canonical(kind: ContactKind, value: str) -> str:
    if kind in (ContactKind.TELEGRAM, ContactKind.WECHAT, ContactKind.WEBSITE):
        return value.lower()
    return value


def extract_contact_entities(text: str, kind: ContactKind | str, source_ipt: str = "") -> list[Contact]:
    """Contacts of one ``kind`` in already-normalized ``text``; spans index into ``text``.

    Results are in text order and deduplicated by value. ``Other`` yields nothing.
    """
    kind = ContactKind(kind)
    seen, out = set(), []
    for value, start, end in _candidates(text, kind):
        value = _canonical(kind, value)
        if value in seen or not is_valid_contact(kind.value, value):
            continue
        seen.add(value)
        out.append(Contact(kind, value, (start, end), source_ipt))
    return out


@dataclass(frozen=True)
class ContactTypeFeatures:
    qq_candidates: int
    phone_candidates: int
    telegram_candidates: int
    wechat_candidates: int
    url_count: int
    qq_indicators: int
    telegram_indicators: int
    wechat_indicators: int
    at_count: int
    digit_count: int
    char_len: int

    def as_array(self) -> list[int]:
        return list(astuple(self))

    @property
    def has_evidence(self) -> bool:
        return any(astuple(self)[:5])


CONTACT_TYPE_FEATURE_NAMES = tuple(f.name for f in fields(ContactTypeFeatures))


def contact_type_features(text: str) -> ContactTypeFeatures:
    """Evidence counts used by the contact-type classifier (text is normalized first)."""
    norm = normalize_evasions(text).normalized_text
    indicators = find_indicators(norm)
    per_kind = {k: sum(1 for kk, _, _ in indicators if kk == k) for k in INDICATORS}
    return ContactTypeFeatures(
        qq_candidates=len(extract_contact_entities(norm, ContactKind.QQ)),
        phone_candidates=len(extract_contact_entities(norm, ContactKind.PHONE)),
        telegram_candidates=len(extract_contact_entities(norm, ContactKind.TELEGRAM)),
        wechat_candidates=len(extract_contact_entities(norm, ContactKind.WECHAT)),
        url_count=len(extract_urls(norm)),
        qq_indicators=per_kind[ContactKind.QQ],
        telegram_indicators=per_kind[ContactKind.TELEGRAM],
        wechat_indicators=per_kind[ContactKind.WECHAT],
        at_count=norm.count("@"),
        digit_count=sum(c.isdigit() for c in norm),
        char_len=len(norm),
    )


class ContactTypeFeaturizer(_TextFeaturizer):
    extractor = staticmethod(contact_type_features)
    feature_names = CONTACT_TYPE_FEATURE_NAMES


def classify_contact_type(text: str, type_model) -> ContactKind:
    """The dominant contact kind of ``text``; ``Other`` when no kind has any evidence.

    ``type_model`` is either a text classifier with ``predict(texts)`` built on
    the ``contact_type`` featurizer, or a bare tree ensemble over
    :class:`ContactTypeFeatures` arrays.
    """
    feats = contact_type_features(text)
    if not feats.has_evidence:
        return ContactKind.OTHER
    if getattr(type_model, "featurizer", None) == "contact_type":
        label = type_model.predict([text])[0]
    else:
        label = type_model.predict(np.asarray([feats.as_array()], dtype=np.float64))[0]
    return ContactKind(str(label))


def extract_contacts(ipt: IptRecord | str, models) -> list[Contact]:
    """Normalize, pick the dominant kind, then extract that kind plus any websites.

    ``models`` is a model bundle exposing ``contact_type`` (or the type model
    itself). Spans refer to the raw IPT text.
    """
    text = ipt.text if isinstance(ipt, IptRecord) else ipt
    source = ipt.id if isinstance(ipt, IptRecord) else ""
    type_model = getattr(models, "contact_type", models)
    trace = normalize_evasions(text)
    norm = trace.normalized_text
    dominant = classify_contact_type(text, type_model)
    kinds: list[ContactKind] = []
    if dominant not in (ContactKind.OTHER, ContactKind.WEBSITE):
        kinds.append(dominant)
    kinds.append(ContactKind.WEBSITE)
    out, seen = [], set()
    for kind in kinds:
        for c in extract_contact_entities(norm, kind):
            key = (c.contact_kind, c.value)
            if key in seen:
                continue
            seen.add(key)
            out.append(Contact(c.contact_kind, c.value, trace.to_original_span(*c.raw_span), source))
    log.debug("extracted %d contacts (dominant=%s)", len(out), dominant.value)
    return out


def dedupe_contacts(contacts: Iterable[Contact]) -> list[Contact]:
    seen, out = set(), []
    for c in contacts:
        if (c.contact_kind, c.value) not in seen:
            seen.add((c.contact_kind, c.value))
            out.append(c)
    return out
