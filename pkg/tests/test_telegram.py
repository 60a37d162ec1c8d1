from __future__ import annotations

from collections import Counter

import pytest

from rsphunt.errors import RateLimited, UnknownHandleError
from rsphunt.hunter.ratelimit import RateGovernor, RateLimitPolicy, VirtualClock
from rsphunt.infiltrate.telegram import FileFixtureTransport, classify_messages, last_message_id, tg_fetch
from rsphunt.records import CategoryLabel, TelegramKind

from conftest import T0, read_jsonl
from oracles import keyword_rule_labels


def account(kind="channel", n=5, epochs=None, rate_first=0):
    epochs = epochs or [1] * n
    return {
        "handle": "desk",
        "profile": {"kind": kind, "subscriber_or_member_count": 42, "title": "Desk"},
        "messages": [{"id": i + 1, "timestamp": f"2024-01-0{e}T00:00:00Z", "text": f"msg {i}", "epoch": e}
                     for i, e in enumerate(epochs)],
        "rate_limit": {"first_calls": rate_first, "retry_after": 3.0},
    }


def test_channel_messages_are_persisted(store):
    t = FileFixtureTransport({"desk": account()})
    profile, new = tg_fetch("desk", t, store, clock=VirtualClock(T0))
    assert profile.account_kind == TelegramKind.CHANNEL and profile.subscriber_or_member_count == 42
    assert len(new) == 5 and store.count("tg_message") == 5
    assert "desk" in t.joined


def test_later_epoch_adds_only_the_delta(store):
    acct = account(n=8, epochs=[1, 1, 1, 1, 1, 2, 2, 2])
    _, first = tg_fetch("desk", FileFixtureTransport({"desk": acct}, epoch=1), store, clock=VirtualClock(T0))
    _, second = tg_fetch("desk", FileFixtureTransport({"desk": acct}, epoch=2), store, clock=VirtualClock(T0))
    assert len(first) == 5
    assert [m.message_id for m in second] == [6, 7, 8]
    assert store.count("tg_message") == 8 and last_message_id(store, "desk") == 8


def test_user_account_yields_profile_only(store):
    t = FileFixtureTransport({"desk": account(kind="user")})
    profile, new = tg_fetch("desk", t, store, clock=VirtualClock(T0))
    assert profile.account_kind == TelegramKind.USER and new == []
    assert store.count("tg_message") == 0 and store.count("tg_profile") == 1
    assert not t.joined


def test_rate_limit_is_retried_after_the_hint(store):
    clock = VirtualClock(T0)
    gov = RateGovernor(RateLimitPolicy(tokens_per_interval=100, interval=60.0), clock)
    t = FileFixtureTransport({"desk": account(rate_first=1)})
    _, new = tg_fetch("desk", t, store, governor=gov, clock=clock)
    assert len(new) == 5 and clock.elapsed == pytest.approx(3.0)


def test_persistent_rate_limit_surfaces(store):
    clock = VirtualClock(T0)
    gov = RateGovernor(RateLimitPolicy(max_retries=1), clock)
    with pytest.raises(RateLimited):
        tg_fetch("desk", FileFixtureTransport({"desk": account(rate_first=5)}), store, governor=gov, clock=clock)


def test_unknown_handle(store):
    with pytest.raises(UnknownHandleError):
        tg_fetch("nobody", FileFixtureTransport({"desk": account()}), store, clock=VirtualClock(T0))


def test_fixture_channel_grows_exactly_once(fixtures_dir, store):
    seen = []
    for epoch in (1, 2, 3, 3):
        t = FileFixtureTransport(fixtures_dir / "telegram", epoch=epoch)
        _, new = tg_fetch("usdt_otc_desk", t, store, clock=VirtualClock(T0))
        seen.append(len(new))
    assert seen == [5, 4, 6, 0]
    ids = [m.message_id for m in store.query("tg_message")]
    assert len(ids) == len(set(ids)) == 15


class FixedLabels:
    def __init__(self, labels):
        self.labels = labels

    def predict(self, texts):
        return [self.labels[t] for t in texts]


def test_classify_ten_messages_four_gambling():
    texts = [f"m{i}" for i in range(10)]
    labels = {t: frozenset({CategoryLabel.GAMBLING}) if i < 4 else frozenset({CategoryLabel.BENIGN})
              for i, t in enumerate(texts)}
    table = classify_messages(texts, FixedLabels(labels))
    assert table.rows == [["Gambling", 4, 100.0, 40.0]]
    assert table.meta == {"total_messages": 10, "illicit_messages": 4}


def test_classify_all_benign_is_empty():
    texts = ["a", "b"]
    table = classify_messages(texts, FixedLabels({t: frozenset({CategoryLabel.BENIGN}) for t in texts}))
    assert table.rows == [] and table.meta["illicit_messages"] == 0


def test_fixture_messages_match_keyword_rules(fixtures_dir, desk_bundle):
    rows = read_jsonl(fixtures_dir / "tg_messages_50.jsonl")
    truth = Counter()
    for r in rows:
        rule = keyword_rule_labels(r["text"])
        assert rule == ({r["category"]} if r["category"] != "Benign" else set()), r["text"]
        truth.update(rule)
    table = classify_messages([r["text"] for r in rows], desk_bundle)
    got = {row[0]: row[1] for row in table.rows}
    assert got == dict(truth)
    total = sum(truth.values())
    for cat, n, pct_illicit, pct_total in table.rows:
        assert pct_illicit == pytest.approx(100.0 * n / total)
        assert pct_total == pytest.approx(100.0 * n / 50)
