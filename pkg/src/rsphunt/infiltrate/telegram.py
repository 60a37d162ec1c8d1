"""Telegram account infiltration against a pluggable messaging transport.

The bundled transport reads one JSON file per account::

    {"handle": "dealer_chan",
     "profile": {"kind": "channel", "subscriber_or_member_count": 812, "title": "..."},
     "messages": [{"id": 1, "timestamp": "2024-01-02T03:04:05Z", "text": "...", "epoch": 1}],
     "rate_limit": {"first_calls": 1, "retry_after": 2.0}}

Only messages whose ``epoch`` is at most the transport's current epoch are
visible, which lets tests replay an account growing over time.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from pathlib import Path
from typing import Iterable, Protocol

from ..errors import RateLimited, UnknownHandleError
from ..records import CategoryLabel, TelegramAccountProfile, TelegramKind, TelegramMessage, from_iso
from ..tables import ReportTable, sort_rows
from ..hunter.ratelimit import RateGovernor, RateLimitPolicy, RealClock

log = logging.getLogger(__name__)


class MessagingTransport(Protocol):
    def get_profile(self, handle: str) -> dict: ...

    def fetch_messages(self, handle: str, since_id: int | None = None) -> list[dict]: ...

    def join(self, handle: str) -> None: ...


class FileFixtureTransport:
    def __init__(self, accounts: dict[str, dict] | str | Path, epoch: int | None = None):
        if isinstance(accounts, (str, Path)):
            loaded = {}
            for path in sorted(Path(accounts).glob("*.json")):
                data = json.loads(path.read_text(encoding="utf-8"))
                loaded[data["handle"]] = data
            accounts = loaded
        self.accounts = {h.lower(): a for h, a in accounts.items()}
        self.epoch = epoch
        self.joined: set[str] = set()
        self.calls: Counter = Counter()

    def _account(self, handle: str) -> dict:
        try:
            return self.accounts[handle.lstrip("@").lower()]
        except KeyError:
            raise UnknownHandleError(handle) from None

    def _maybe_limit(self, handle: str, op: str) -> None:
        acct = self._account(handle)
        self.calls[(handle, op)] += 1
        rl = acct.get("rate_limit") or {}
        if self.calls[(handle, op)] <= int(rl.get("first_calls", 0)):
            raise RateLimited(rl.get("retry_after"))

    def get_profile(self, handle: str) -> dict:
        acct = self._account(handle)
        return dict(acct.get("profile", {}), handle=acct["handle"])

    def fetch_messages(self, handle: str, since_id: int | None = None) -> list[dict]:
        acct = self._account(handle)
        self._maybe_limit(handle, "fetch")
        out = []
        for m in acct.get("messages", []):
            if self.epoch is not None and m.get("epoch", 0) > self.epoch:
                continue
            if since_id is not None and m["id"] <= since_id:
                continue
            out.append(m)
        return sorted(out, key=lambda m: m["id"])

    def join(self, handle: str) -> None:
        self.joined.add(self._account(handle)["handle"])


def last_message_id(store, handle: str) -> int | None:
    ids = [m.message_id for m in store.query("tg_message", lambda m: m.handle == handle)]
    return max(ids) if ids else None


def tg_fetch(
    handle: str,
    transport: MessagingTransport,
    store,
    governor: RateGovernor | None = None,
    clock=None,
) -> tuple[TelegramAccountProfile, list[TelegramMessage]]:
    """Record the account profile and, for channels and groups, any messages newer than the stored ones."""
    clock = clock or RealClock()
    governor = governor or RateGovernor(RateLimitPolicy(tokens_per_interval=20, interval=60.0, backoff_on_limit=5.0), clock)
    raw = governor.call(lambda: transport.get_profile(handle))
    canonical = raw.get("handle", handle)
    count = raw.get("subscriber_or_member_count")
    profile = TelegramAccountProfile(
        handle=canonical,
        account_kind=TelegramKind(raw["kind"]),
        subscriber_or_member_count=None if count is None else int(count),
        fetched_at=clock.now(),
        title=raw.get("title", ""),
    )
    store.append(profile)
    if profile.account_kind not in (TelegramKind.CHANNEL, TelegramKind.GROUP):
        return profile, []
    governor.call(lambda: transport.join(canonical))
    since = last_message_id(store, canonical)
    batch = governor.call(lambda: transport.fetch_messages(canonical, since))
    new = []
    for m in batch:
        msg = TelegramMessage(canonical, int(m["id"]), from_iso(m["timestamp"]), m["text"])
        if store.get("tg_message", msg.id) is None:
            store.append(msg)
            new.append(msg)
    log.info("tg %s: %s, %d new messages (since id %s)", canonical, profile.account_kind.value, len(new), since)
    return profile, new


def classify_messages(messages: Iterable[TelegramMessage | str], model) -> ReportTable:
    """Category distribution over messages that received at least one illicit label.

    ``% of illicit`` divides by illicit label assignments; ``% of total``
    divides the category's message count by all messages, benign included.
    """
    ml = getattr(model, "multilabel", model)
    texts = [m.text if isinstance(m, TelegramMessage) else m for m in messages]
    label_sets = ml.predict(texts) if texts else []
    counts: Counter = Counter()
    illicit_msgs = 0
    for labels in label_sets:
        illicit = [lab for lab in labels if lab != CategoryLabel.BENIGN]
        if illicit:
            illicit_msgs += 1
            counts.update(illicit)
    assignments = sum(counts.values())
    rows = []
    for label, n in counts.items():
        key = getattr(label, "value", str(label))
        rows.append([key, n, 100.0 * n / assignments, 100.0 * n / len(texts)])
    table = ReportTable(
        title="Telegram message categories",
        columns=["category", "messages", "% of illicit", "% of total"],
        rows=sort_rows(rows, 2),
        provenance=f"{len(texts)} messages, {illicit_msgs} with an illicit label",
        meta={"total_messages": len(texts), "illicit_messages": illicit_msgs},
    )
    return table
