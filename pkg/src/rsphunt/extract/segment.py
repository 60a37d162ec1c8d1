from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from ..textfeat import is_symbol
from .urls import extract_urls

SEGMENT_BRACKETS = frozenset("{}[]【】『』()（）")
SEGMENT_PUNCT = frozenset("，。、；!！?？|‖/\\~～…")
MIN_SEGMENT_LEN = 2


def is_separator(ch: str) -> bool:
    return ch in SEGMENT_BRACKETS or ch in SEGMENT_PUNCT or is_symbol(ch)


@dataclass(frozen=True)
class IptSegment:
    text: str
    span: tuple[int, int]
    kind: Literal["url", "candidate"]


def segment_ipt(text: str) -> list[IptSegment]:
    """Split an IPT into URL segments and candidate segments, in text order.

    URLs are cut out first. The remaining text is split on brackets, symbol and
    emoji characters and a fixed punctuation set; fragments are trimmed of
    whitespace and kept only when at least two characters remain.
    """
    segments: list[IptSegment] = []
    cursor = 0

    def split_plain(lo: int, hi: int) -> None:
        start = lo
        for i in range(lo, hi + 1):
            if i == hi or is_separator(text[i]):
                a, b = start, i
                while a < b and text[a].isspace():
                    a += 1
                while b > a and text[b - 1].isspace():
                    b -= 1
                if b - a >= MIN_SEGMENT_LEN:
                    segments.append(IptSegment(text[a:b], (a, b), "candidate"))
                start = i + 1

    for url, (s, e) in extract_urls(text):
        split_plain(cursor, s)
        segments.append(IptSegment(url, (s, e), "url"))
        cursor = e
    split_plain(cursor, len(text))
    return segments
