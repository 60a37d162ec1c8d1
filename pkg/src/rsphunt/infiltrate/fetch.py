"""Fetch backends: a scenario-driven mock, a local fixture HTTP proxy, and a urllib client.

A scenario file maps absolute URLs to canned responses::

    {"routes": {
        "http://a.test/": {"redirect": "http://b.test/", "status": 302},
        "http://b.test/": {"status": 200, "body": "<html>...</html>"},
        "http://c.test/": {"unreachable": true},
        "http://v.test/": {"body": "home", "vantages": {"cn": {"redirect": "http://google.com/"}}}
    }}

A per-vantage variant replaces the route's fields for that vantage. Unknown
URLs get a 404.
"""

from __future__ import annotations

import json
import logging
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Protocol

from ..errors import FetchError

log = logging.getLogger(__name__)

DEFAULT_VANTAGE = "default"


@dataclass(frozen=True)
class FetchResponse:
    status: int
    headers: dict[str, str]
    body: str
    final_url: str

    def header(self, name: str) -> str | None:
        for k, v in self.headers.items():
            if k.lower() == name.lower():
                return v
        return None


class FetchBackend(Protocol):
    vantage: str

    def get(self, url: str) -> FetchResponse: ...


@dataclass
class Scenario:
    routes: dict[str, dict] = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path) -> Scenario:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def from_dict(cls, d: dict) -> Scenario:
        return cls(routes=dict(d.get("routes", {})))

    def to_dict(self) -> dict:
        return {"routes": self.routes}

    def route(self, url: str, vantage: str) -> dict | None:
        spec = self.routes.get(url)
        if spec is None:
            alt = url[:-1] if url.endswith("/") else url + "/"
            spec = self.routes.get(alt)
        if spec is None:
            return None
        variant = (spec.get("vantages") or {}).get(vantage)
        if variant is not None:
            spec = {**{k: v for k, v in spec.items() if k != "vantages"}, **variant}
            # a variant that redirects should not inherit the default body and vice versa
            if "redirect" in variant and "body" not in variant:
                spec.pop("body", None)
            if "body" in variant and "redirect" not in variant:
                spec.pop("redirect", None)
        return spec

    def respond(self, url: str, vantage: str) -> FetchResponse:
        """The canned response for ``url``; raises ``FetchError`` for unreachable routes."""
        spec = self.route(url, vantage)
        if spec is None:
            return FetchResponse(404, {"Content-Type": "text/html"}, "not found", url)
        if spec.get("unreachable"):
            raise FetchError(f"connection to {url} failed")
        headers = {"Content-Type": "text/html; charset=utf-8", **spec.get("headers", {})}
        status = int(spec.get("status", 302 if "redirect" in spec else 200))
        if "redirect" in spec:
            headers["Location"] = spec["redirect"]
        return FetchResponse(status, headers, spec.get("body", ""), url)


class MockBackend:
    """In-process backend answering from a scenario."""

    def __init__(self, scenario: Scenario, vantage: str = DEFAULT_VANTAGE):
        self.scenario = scenario
        self.vantage = vantage
        self.requests: list[str] = []

    def get(self, url: str) -> FetchResponse:
        self.requests.append(url)
        return self.scenario.respond(url, self.vantage)


class _ProxyHandler(BaseHTTPRequestHandler):
    server_version = "FixtureProxy/1"

    def do_GET(self):  # noqa: N802 (stdlib naming)
        url = self.path
        try:
            resp = self.server.scenario.respond(url, self.server.vantage)
        except FetchError:
            # drop the connection without a response
            self.close_connection = True
            self.connection.shutdown(2)
            return
        body = resp.body.encode("utf-8")
        self.send_response(resp.status)
        for k, v in resp.headers.items():
            self.send_header(k, v)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, fmt, *args):
        log.debug("fixture %s: " + fmt, self.server.vantage, *args)


class FixtureServer:
    """A local HTTP proxy serving a scenario for one vantage.

    Point an ``HttpBackend`` at ``proxy_url``; every ``http://`` request is
    answered from the scenario, so fixture hostnames never hit DNS.
    """

    def __init__(self, scenario: Scenario, vantage: str = DEFAULT_VANTAGE, host: str = "127.0.0.1"):
        self.scenario = scenario
        self.vantage = vantage
        self._httpd = ThreadingHTTPServer((host, 0), _ProxyHandler)
        self._httpd.daemon_threads = True
        self._httpd.scenario = scenario
        self._httpd.vantage = vantage
        self._thread: threading.Thread | None = None

    @property
    def proxy_url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> FixtureServer:
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> FixtureServer:
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


class _NoRedirect(urllib.request.HTTPRedirectHandler):
    def redirect_request(self, req, fp, code, msg, headers, newurl):
        return None


class HttpBackend:
    """Real HTTP client (optionally through a proxy) that reports redirects instead of following them."""

    def __init__(self, proxy_url: str | None = None, vantage: str = DEFAULT_VANTAGE, timeout: float = 10.0,
                 user_agent: str = "Mozilla/5.0 (compatible; rsphunt)"):
        handlers = [_NoRedirect()]
        proxies = {"http": proxy_url} if proxy_url else {}
        handlers.append(urllib.request.ProxyHandler(proxies))
        self._opener = urllib.request.build_opener(*handlers)
        self.vantage = vantage
        self.timeout = timeout
        self.user_agent = user_agent

    def get(self, url: str) -> FetchResponse:
        req = urllib.request.Request(url, headers={"User-Agent": self.user_agent})
        try:
            with self._opener.open(req, timeout=self.timeout) as resp:
                return self._response(resp.status, resp.headers, resp.read(), resp.geturl())
        except urllib.error.HTTPError as exc:
            body = exc.read() if exc.fp is not None else b""
            return self._response(exc.code, exc.headers, body, url)
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise FetchError(f"GET {url} failed: {exc}") from exc
        except Exception as exc:  # http.client protocol errors on dropped connections
            raise FetchError(f"GET {url} failed: {exc!r}") from exc

    @staticmethod
    def _response(status, headers, body: bytes, final_url: str) -> FetchResponse:
        charset = headers.get_content_charset() if headers is not None else None
        text = body.decode(charset or "utf-8", errors="replace")
        return FetchResponse(int(status), dict(headers.items()) if headers is not None else {}, text, final_url)
