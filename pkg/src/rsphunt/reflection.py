"""URL-reflection detection and URL Reflection Scheme (URS) templates.

A URS is a URL with exactly one ``{R}`` slot standing for the reflected value,
either as a query value (``https://a.b/s?q={R}``) or as the terminal path
segment (``https://www.pixiv.net/tags/{R}``).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping
from urllib.parse import quote, quote_plus, unquote_plus, urlsplit, urlunsplit

from .domains import apex_domain
from .errors import MalformedUrlError
from .records import (
    URS_SLOT,
    Location,
    ReflectedParam,
    ReflectionFinding,
    SearchResultEntry,
    UrlReflectionScheme,
)

MIN_REFLECTED_LEN = 3
PATH_PARAM_PREFIX = "/"
_SENTINEL = "RSLOTSENTINEL0"


def _split(url: str):
    try:
        parts = urlsplit(url)
        host = parts.hostname
    except ValueError as exc:
        raise MalformedUrlError(f"cannot parse URL {url!r}: {exc}") from exc
    if parts.scheme.lower() not in ("http", "https") or not host:
        raise MalformedUrlError(f"not an absolute http(s) URL: {url!r}")
    return parts


def url_parameters(url: str) -> list[tuple[str, str]]:
    """(name, decoded value) for each query parameter, then the terminal path segment.

    Values are percent- and plus-decoded exactly once. The path segment is named
    ``"/<index>"`` where index is its position in ``path.split("/")``.
    """
    parts = _split(url)
    params = []
    if parts.query:
        for piece in parts.query.split("&"):
            if not piece:
                continue
            key, _, raw = piece.partition("=")
            params.append((unquote_plus(key), unquote_plus(raw)))
    segments = parts.path.split("/")
    for idx in range(len(segments) - 1, -1, -1):
        if segments[idx]:
            params.append((f"{PATH_PARAM_PREFIX}{idx}", unquote_plus(segments[idx])))
            break
    return params


def detect_reflection(
    entry: SearchResultEntry | str, page_text_by_location: Mapping[str, str]
) -> ReflectionFinding | None:
    """Find URL parameter values rendered verbatim in the page.

    ``page_text_by_location`` maps location names (see ``Location``) to plain
    text already stripped of markup. Values shorter than three characters are
    ignored. Returns ``None`` when nothing is reflected.
    """
    url = entry.url if isinstance(entry, SearchResultEntry) else entry
    texts = {Location(k): v for k, v in page_text_by_location.items() if v}
    found = []
    for name, value in url_parameters(url):
        if len(value) < MIN_REFLECTED_LEN:
            continue
        for loc in Location:
            if loc in texts and value in texts[loc]:
                found.append(ReflectedParam(name, value, loc))
    if not found:
        return None
    return ReflectionFinding(url=url, reflected_params=tuple(found))


def _template_for(url: str, param: ReflectedParam) -> str:
    parts = _split(url)
    if param.name.startswith(PATH_PARAM_PREFIX) and param.name[1:].isdigit():
        idx = int(param.name[1:])
        segments = parts.path.split("/")
        if idx < len(segments) and unquote_plus(segments[idx]) == param.value:
            segments[idx] = URS_SLOT
            return urlunsplit((parts.scheme, parts.netloc, "/".join(segments), parts.query, ""))
    pieces = parts.query.split("&") if parts.query else []
    for i, piece in enumerate(pieces):
        key, _, raw = piece.partition("=")
        if unquote_plus(key) == param.name and unquote_plus(raw) == param.value:
            pieces[i] = f"{key}={URS_SLOT}"
            return urlunsplit((parts.scheme, parts.netloc, parts.path, "&".join(pieces), ""))
    raise MalformedUrlError(f"parameter {param.name!r} not present in {url!r}")


def urs_from_template(template: str, reflection_param: str | int | None = None) -> UrlReflectionScheme:
    if template.count(URS_SLOT) != 1:
        raise MalformedUrlError(f"template must contain exactly one {URS_SLOT}: {template!r}")
    parts = _split(template.replace(URS_SLOT, _SENTINEL))
    fqdn = parts.hostname
    if reflection_param is None:
        if _SENTINEL in parts.query:
            for piece in parts.query.split("&"):
                key, _, raw = piece.partition("=")
                if raw == _SENTINEL:
                    reflection_param = unquote_plus(key)
        else:
            reflection_param = parts.path.split("/").index(_SENTINEL)
    return UrlReflectionScheme(
        template=template, fqdn=fqdn, apex_domain=apex_domain(fqdn), reflection_param=reflection_param
    )


def _param_ref(name: str) -> str | int:
    if name.startswith(PATH_PARAM_PREFIX) and name[1:].isdigit():
        return int(name[1:])
    return name


def canonicalize_urs(finding: ReflectionFinding) -> UrlReflectionScheme:
    """URS for the first reflected parameter (query order; the path segment comes last)."""
    chosen = finding.reflected_params[0]
    return urs_from_template(_template_for(finding.url, chosen), _param_ref(chosen.name))


def canonicalize_all(finding: ReflectionFinding) -> list[UrlReflectionScheme]:
    """One URS per distinct reflected parameter, in finding order."""
    out, seen = [], set()
    for p in finding.reflected_params:
        if p.name in seen:
            continue
        seen.add(p.name)
        out.append(urs_from_template(_template_for(finding.url, p), _param_ref(p.name)))
    return out


def _slot_in_query(template: str) -> bool:
    head = template.split(URS_SLOT, 1)[0]
    return "?" in head


def instantiate(template: str | UrlReflectionScheme, value: str) -> str:
    """Fill the ``{R}`` slot with ``value``, percent-encoded for its position."""
    if isinstance(template, UrlReflectionScheme):
        template = template.template
    encoded = quote_plus(value, safe="") if _slot_in_query(template) else quote(value, safe="")
    return template.replace(URS_SLOT, encoded)


def site_prefix(urs: UrlReflectionScheme | str) -> str:
    """The URL prefix used with a ``site:`` filter, e.g. ``https://a.b/search``."""
    template = urs.template if isinstance(urs, UrlReflectionScheme) else urs
    if _slot_in_query(template):
        return template.split("?", 1)[0]
    return template.split(URS_SLOT, 1)[0].rstrip("/")


def match_urs(urs: UrlReflectionScheme | str, url: str) -> str | None:
    """Value bound to ``{R}`` when ``url`` instantiates the template, else ``None``."""
    template = urs.template if isinstance(urs, UrlReflectionScheme) else urs
    t = _split(template.replace(URS_SLOT, _SENTINEL))
    u = _split(url)
    if t.scheme.lower() != u.scheme.lower() or t.hostname != u.hostname or t.port != u.port:
        return None
    if _SENTINEL in t.query:
        if t.path != u.path:
            return None
        t_pieces = t.query.split("&")
        u_pieces = u.query.split("&") if u.query else []
        if len(t_pieces) != len(u_pieces):
            return None
        binding = None
        for tp, up in zip(t_pieces, u_pieces):
            if _SENTINEL in tp:
                t_key, _, _ = tp.partition("=")
                u_key, sep, u_raw = up.partition("=")
                if t_key != u_key or not sep:
                    return None
                binding = unquote_plus(u_raw)
            elif tp != up:
                return None
        return binding or None
    if t.query != u.query:
        return None
    t_segs, u_segs = t.path.split("/"), u.path.split("/")
    if len(t_segs) != len(u_segs):
        return None
    binding = None
    for ts, us in zip(t_segs, u_segs):
        if ts == _SENTINEL:
            binding = unquote_plus(us)
        elif ts != us:
            return None
    return binding or None


def load_urs_fixture(path: str | Path) -> list[UrlReflectionScheme]:
    """Read a JSON-lines file of ``{template, fqdn, apex_domain}`` objects."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            out.append(urs_from_template(json.loads(line)["template"]))
    return out


def dump_urs_fixture(schemes: Iterable[UrlReflectionScheme], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in schemes:
            row = {"template": s.template, "fqdn": s.fqdn, "apex_domain": s.apex_domain}
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
