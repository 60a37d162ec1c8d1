"""Approximate language tagging by Unicode script majority.

This is a baseline only: any callable ``text -> tag`` can replace it.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from typing import Callable

LanguageIdentifier = Callable[[str], str]

SCRIPT_TAGS = {
    "Han": "zh",
    "Hangul": "ko",
    "Kana": "ja",
    "Latin": "und-Latn",
    "Thai": "th",
    "Cyrillic": "und-Cyrl",
}
# kana outranks Han on ties so mixed kanji/kana text reads as Japanese
_TIE_ORDER = ("Kana", "Hangul", "Han", "Thai", "Cyrillic", "Latin")


def char_script(ch: str) -> str | None:
    cp = ord(ch)
    if 0x3040 <= cp <= 0x30FF or 0x31F0 <= cp <= 0x31FF or 0xFF66 <= cp <= 0xFF9D:
        return "Kana"
    if 0xAC00 <= cp <= 0xD7A3 or 0x1100 <= cp <= 0x11FF or 0x3130 <= cp <= 0x318F:
        return "Hangul"
    if 0x4E00 <= cp <= 0x9FFF or 0x3400 <= cp <= 0x4DBF or 0xF900 <= cp <= 0xFAFF or 0x20000 <= cp <= 0x2FA1F:
        return "Han"
    if 0x0E00 <= cp <= 0x0E7F:
        return "Thai"
    if 0x0400 <= cp <= 0x052F:
        return "Cyrillic"
    if ch.isalpha() and "LATIN" in unicodedata.name(ch, ""):
        return "Latin"
    return None


def script_counts(text: str) -> Counter:
    return Counter(s for s in map(char_script, text) if s is not None)


def tag_language(text: str) -> str:
    """Tag of the script with the most letters in ``text``; ``und`` when there are none."""
    counts = script_counts(text)
    if not counts:
        return "und"
    best = max(counts.values())
    for script in _TIE_ORDER:
        if counts.get(script) == best:
            return SCRIPT_TAGS[script]
    return "und"
