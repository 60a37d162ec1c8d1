"""Small HTML scanners built on the stdlib parser."""

from __future__ import annotations

import re
from html.parser import HTMLParser
from urllib.parse import urljoin

_JS_PATTERNS = (
    re.compile(r"""(?:window\.|document\.|self\.|top\.)?location\.href\s*=\s*(['"])(?P<url>[^'"]+)\1"""),
    re.compile(r"""(?:window|document)\.location\s*=\s*(['"])(?P<url>[^'"]+)\1"""),
    re.compile(r"""location\.replace\(\s*(['"])(?P<url>[^'"]+)\1\s*\)"""),
)
_REFRESH_URL = re.compile(r"""url\s*=\s*['"]?(?P<url>[^'";]+)""", re.IGNORECASE)


class _Scanner(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.refresh: str | None = None
        self.iframes: list[str] = []
        self.scripts: list[str] = []
        self.text: list[str] = []
        self._in: list[str] = []

    def handle_starttag(self, tag, attrs):
        a = {k.lower(): (v or "") for k, v in attrs}
        if tag == "meta" and a.get("http-equiv", "").lower() == "refresh" and self.refresh is None:
            m = _REFRESH_URL.search(a.get("content", ""))
            if m:
                self.refresh = m.group("url").strip()
        elif tag == "iframe" and a.get("src"):
            self.iframes.append(a["src"].strip())
        if tag in ("script", "style"):
            self._in.append(tag)

    def handle_endtag(self, tag):
        if self._in and self._in[-1] == tag:
            self._in.pop()

    def handle_data(self, data):
        if self._in and self._in[-1] == "script":
            self.scripts.append(data)
        elif not self._in:
            self.text.append(data)


def _scan(html: str) -> _Scanner:
    s = _Scanner()
    s.feed(html)
    s.close()
    return s


def meta_refresh_target(html: str, base: str) -> str | None:
    target = _scan(html).refresh
    return urljoin(base, target) if target else None


def js_location_target(html: str, base: str) -> str | None:
    """First static string-literal location assignment in inline scripts."""
    for script in _scan(html).scripts:
        hits = [m for rx in _JS_PATTERNS for m in rx.finditer(script)]
        if hits:
            first = min(hits, key=lambda m: m.start())
            return urljoin(base, first.group("url"))
    return None


def iframe_sources(html: str, base: str) -> list[str]:
    return [urljoin(base, src) for src in _scan(html).iframes]


def visible_text(html: str) -> str:
    return " ".join(" ".join(_scan(html).text).split())
