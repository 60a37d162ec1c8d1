from __future__ import annotations

from ..grammars import URL_RE, URL_TRAILING_PUNCT


def extract_urls(text: str) -> list[tuple[str, tuple[int, int]]]:
    """URLs/domains in ``text`` as ``(url, (start, end))``, left to right, non-overlapping.

    A match needs a host of at least two labels ending in a known TLD; scheme,
    port, path and query are optional. Trailing sentence punctuation is not
    part of the match.
    """
    out = []
    for m in URL_RE.finditer(text):
        start, end = m.span()
        if m.group("path"):
            while end > m.end("host") and text[end - 1] in URL_TRAILING_PUNCT:
                end -= 1
        out.append((text[start:end], (start, end)))
    return out


def url_host(url: str) -> str:
    """Lower-cased host of a match returned by :func:`extract_urls`."""
    m = URL_RE.match(url)
    if m is None:
        raise ValueError(f"not a URL match: {url!r}")
    return m.group("host").lower()
