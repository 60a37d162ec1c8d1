"""Redirect-chain following over HTTP 3xx, meta refresh and static JS location assignments."""

from __future__ import annotations

import logging
from urllib.parse import urljoin, urlsplit

from ..errors import FetchError, MalformedUrlError
from ..records import Mechanism, RedirectChain, RedirectHop
from .fetch import FetchBackend, FetchResponse
from .html import js_location_target, meta_refresh_target

log = logging.getLogger(__name__)

DEFAULT_HOP_CAP = 10


def _fqdn(url: str) -> str:
    try:
        host = urlsplit(url).hostname
    except ValueError as exc:
        raise MalformedUrlError(f"cannot parse {url!r}") from exc
    if not host:
        raise MalformedUrlError(f"no host in {url!r}")
    return host.lower()


def next_hop(resp: FetchResponse, url: str) -> tuple[str, Mechanism] | None:
    """Where the page sends the visitor next, if anywhere."""
    if 300 <= resp.status < 400 and resp.header("Location"):
        return urljoin(url, resp.header("Location")), Mechanism.HTTP_3XX
    if resp.status == 200 and resp.body:
        target = meta_refresh_target(resp.body, url)
        if target:
            return target, Mechanism.META_REFRESH
        target = js_location_target(resp.body, url)
        if target:
            return target, Mechanism.JS_LOCATION
    return None


def follow_chain(
    url: str, backend: FetchBackend, hop_cap: int = DEFAULT_HOP_CAP
) -> tuple[RedirectChain, FetchResponse | None]:
    """Like :func:`fetch_chain` but also returns the last response received."""
    if hop_cap < 1:
        raise ValueError("hop_cap must be >= 1")
    hops: list[RedirectHop] = []
    visited: set[str] = set()
    mechanism = Mechanism.INITIAL
    last: FetchResponse | None = None
    current = url
    while True:
        fqdn = _fqdn(current)
        try:
            resp = backend.get(current)
        except FetchError as exc:
            if not hops:
                hops.append(RedirectHop(current, fqdn, mechanism, None))
            log.info("chain from %s stopped at %s: %s", url, current, exc)
            return RedirectChain(tuple(hops), error=str(exc)), last
        visited.add(current)
        hops.append(RedirectHop(current, fqdn, mechanism, resp.status))
        last = resp
        step = next_hop(resp, current)
        if step is None:
            return RedirectChain(tuple(hops)), last
        target, mechanism = step
        if target in visited:
            return RedirectChain(tuple(hops), loop=True), last
        if len(hops) >= hop_cap:
            return RedirectChain(tuple(hops), truncated=True), last
        current = target


def fetch_chain(url: str, backend: FetchBackend, hop_cap: int = DEFAULT_HOP_CAP) -> RedirectChain:
    """Follow ``url`` until a terminal page, a revisited URL, an error or ``hop_cap`` hops."""
    return follow_chain(url, backend, hop_cap)[0]
