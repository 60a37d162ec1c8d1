"""Validation grammars for contact values and the in-text URL pattern."""

from __future__ import annotations

import re

from .domains import URL_TLDS

_TLD_ALT = "|".join(sorted(URL_TLDS, key=lambda t: (-len(t), t)))
_LABEL = r"[A-Za-z0-9](?:[A-Za-z0-9-]{0,61}[A-Za-z0-9])?"

HOST_PATTERN = rf"(?:{_LABEL}\.)+(?:{_TLD_ALT})"

# scheme? host port? path?  -- ASCII only; brackets are excluded from the path so
# decorations like "(a.com/x)" do not leak into the match.
URL_RE = re.compile(
    rf"(?<![A-Za-z0-9_.\-])"
    rf"(?:(?P<scheme>https?)://)?"
    rf"(?P<host>{HOST_PATTERN})(?![A-Za-z0-9\-])"
    rf"(?::\d{{1,5}})?"
    rf"(?P<path>[/?#][A-Za-z0-9\-._~:/?#@!$&'*+,;=%]*)?",
    re.IGNORECASE,
)

URL_TRAILING_PUNCT = ".,;:!?'"

HOST_RE = re.compile(rf"^{HOST_PATTERN}$", re.IGNORECASE)
QQ_RE = re.compile(r"^[1-9][0-9]{4,10}$")
PHONE_RE = re.compile(r"^\+?[0-9]{7,15}$")
TELEGRAM_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]{4,31}$")
WECHAT_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_-]{5,19}$")

_GRAMMARS = {
    "Website": HOST_RE,
    "Telegram": TELEGRAM_RE,
    "WeChat": WECHAT_RE,
    "QQ": QQ_RE,
    "Phone": PHONE_RE,
}


def is_valid_contact(kind: str, value: str) -> bool:
    """True when ``value`` satisfies the grammar of contact ``kind``.

    ``Other`` accepts any non-empty value.
    """
    kind = getattr(kind, "value", kind)
    if kind == "Other":
        return bool(value)
    grammar = _GRAMMARS.get(kind)
    if grammar is None:
        raise ValueError(f"unknown contact kind {kind!r}")
    return bool(grammar.match(value))
