from __future__ import annotations

import json
import unicodedata

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsphunt.extract.contacts import (
    classify_contact_type,
    contact_type_features,
    dedupe_contacts,
    extract_contact_entities,
    extract_contacts,
)
from rsphunt.extract.keywords import extract_keywords
from rsphunt.extract.normalize import (
    RULE_CONFUSABLE,
    RULE_DOT,
    RULE_FOLD,
    RULE_ZERO_WIDTH,
    load_confusables,
    normalize_evasions,
)
from rsphunt.extract.segment import is_separator, segment_ipt
from rsphunt.extract.urls import extract_urls
from rsphunt.grammars import is_valid_contact
from rsphunt.records import ContactKind, IptRecord

from conftest import T0, read_jsonl

# -- urls and segmentation -------------------------------------------------


def test_url_examples():
    assert extract_urls("visit a.com now") == [("a.com", (6, 11))]
    assert extract_urls("ncao3.com是网站") == [("ncao3.com", (0, 9))]
    assert extract_urls("價格3.5元") == []


def test_segment_examples():
    assert [s.text for s in segment_ipt("【加V】abc123")] == ["加V", "abc123"]
    assert [s.text for s in segment_ipt("no separators")] == ["no separators"]
    segs = segment_ipt("看a.com【微abc】")
    assert [(s.text, s.kind) for s in segs] == [("a.com", "url"), ("微abc", "candidate")]


@settings(max_examples=300)
@given(st.text(alphabet=st.sampled_from(list("ab微信 【】|，✅a.com1")), max_size=30))
def test_segments_cover_text_between_separators(text):
    segs = segment_ipt(text)
    spans = [s.span for s in segs]
    assert spans == sorted(spans)
    for s in segs:
        assert text[s.span[0]:s.span[1]] == s.text
    # every character outside segments is a separator, whitespace, or part of a dropped short fragment
    covered = set()
    for a, b in spans:
        covered.update(range(a, b))
    leftovers = [i for i in range(len(text)) if i not in covered and not is_separator(text[i]) and not text[i].isspace()]
    for i in leftovers:
        j = i
        while j < len(text) and j not in covered and not is_separator(text[j]):
            j += 1
        assert len(text[i:j].strip()) < 2


# -- normalization ---------------------------------------------------------


@pytest.mark.parametrize(
    "raw, expected",
    [("ｑｑ１２３４５", "qq12345"), ("abc。com", "abc.com"), ("ｔｇ：@ｔｓ７７５", "tg:@ts775")],
)
def test_normalize_examples(raw, expected):
    assert normalize_evasions(raw).normalized_text == expected


def test_fullwidth_fold_matches_compatibility_table():
    raw = "ｑｑ１２３４５"
    assert normalize_evasions(raw).normalized_text == "".join(unicodedata.normalize("NFKC", c) for c in raw)


def test_plain_text_untouched():
    t = normalize_evasions("plain text")
    assert t.normalized_text == "plain text" and t.edits == ()


def test_each_rule_fires():
    assert {e.rule for e in normalize_evasions("ｑｑ").edits} == {RULE_FOLD}
    assert {e.rule for e in normalize_evasions("сasino").edits} == {RULE_CONFUSABLE}
    assert {e.rule for e in normalize_evasions("abc点com").edits} == {RULE_DOT}
    assert {e.rule for e in normalize_evasions("ab​cd").edits} == {RULE_ZERO_WIDTH}
    assert normalize_evasions("qq 12❤345678").normalized_text == "qq 12345678"


def test_decoration_kept_between_words():
    # a heart between two plain words is not a split token
    assert normalize_evasions("love❤you").normalized_text == "love❤you"


@settings(max_examples=300)
@given(st.text(alphabet=st.sampled_from(list("ab1２ｑ。点​❤★сo@: 微")), max_size=25))
def test_normalize_idempotent_and_replayable(text):
    trace = normalize_evasions(text)
    again = normalize_evasions(trace.normalized_text)
    assert again.normalized_text == trace.normalized_text and again.edits == ()
    assert trace.replay() == trace.normalized_text
    assert len(trace.origins) == len(trace.normalized_text)


def test_original_span_mapping():
    raw = "看ｔｇ：@ｔｓ７７５"
    trace = normalize_evasions(raw)
    start = trace.normalized_text.index("ts775")
    a, b = trace.to_original_span(start, start + 5)
    assert raw[a:b] == "ｔｓ７７５"


def test_confusables_file_format(tmp_path):
    p = tmp_path / "c.tsv"
    p.write_text("# comment\n0430\ta\t# cyrillic a\n", encoding="utf-8")
    assert load_confusables(p) == {"а": "a"}
    assert len(load_confusables()) >= 200


# -- contacts --------------------------------------------------------------


@pytest.mark.parametrize(
    "text, kind, expected",
    [
        ("询telegram:@ts775", ContactKind.TELEGRAM, ["ts775"]),
        ("加扣扣123456", ContactKind.QQ, ["123456"]),
        ("飞机@a", ContactKind.TELEGRAM, []),
    ],
)
def test_entity_examples(text, kind, expected):
    assert [c.value for c in extract_contact_entities(text, kind)] == expected


def test_type_examples(desk_bundle):
    assert classify_contact_type("正品球衣 询telegram:@ts775", desk_bundle.contact_type) == ContactKind.TELEGRAM
    assert classify_contact_type("cheapcoins.com", desk_bundle.contact_type) == ContactKind.WEBSITE
    assert classify_contact_type("今天天气不错", desk_bundle.contact_type) == ContactKind.OTHER
    assert not contact_type_features("今天天气不错").has_evidence


@pytest.mark.parametrize(
    "text, expected",
    [
        ("办证【微:abc_888】看a.com", {("WeChat", "abc_888"), ("Website", "a.com")}),
        ("how to bake bread", set()),
        ("ｔｇ：@ｔｓ７７５", {("Telegram", "ts775")}),
    ],
)
def test_extract_contacts_examples(desk_bundle, text, expected):
    got = {(c.contact_kind.value, c.value) for c in extract_contacts(text, desk_bundle)}
    assert got == expected


def test_spans_point_into_raw_text(desk_bundle):
    rec = IptRecord.new("ｔｇ：@ｔｓ７７５ 体育", T0, sources=(("q", "https://a.example.com/"),))
    (c,) = extract_contacts(rec, desk_bundle)
    assert c.source_ipt == rec.id
    assert normalize_evasions(rec.text[c.raw_span[0]:c.raw_span[1]]).normalized_text == "ts775"


def test_dedupe_contacts(desk_bundle):
    cs = extract_contacts("tg:@ts775 电报 ts775", desk_bundle) * 2
    assert len(dedupe_contacts(cs)) == 1


FULLWIDTH = {chr(c): chr(c + 0xFEE0) for c in range(0x21, 0x7F)}
LOOKALIKE = {"a": "а", "e": "е", "o": "о", "p": "р", "c": "с", "x": "х", "1": "①", "2": "②", "5": "⑤", "8": "⑧"}


def perturb(text: str, value: str, rule: int) -> str | None:
    """Inverse of one normalization rule applied to the contact value inside ``text``."""
    i = text.lower().find(value)
    if i < 0:
        return None
    raw = text[i:i + len(value)]
    if rule == 1:
        new = "".join(FULLWIDTH.get(ch, ch) for ch in raw)
    elif rule == 2:
        k = next((k for k, ch in enumerate(raw) if ch in LOOKALIKE), None)
        if k is None:
            return None
        new = raw[:k] + LOOKALIKE[raw[k]] + raw[k + 1:]
    elif rule == 3:
        if "." not in raw:
            return None
        new = raw.replace(".", "。")
    elif rule == 4:
        new = raw[:2] + "​" + raw[2:]
    else:
        if not any(ch.isdigit() for ch in raw) or "." in raw:
            return None
        new = raw[:2] + "❤" + raw[2:]
    return text[:i] + new + text[i + len(value):]


def test_extraction_is_evasion_stable(desk_bundle, fixtures_dir):
    clean = [r for r in read_jsonl(fixtures_dir / "contacts_50.jsonl") if r["evasion_rule"] is None]
    checked = 0
    for row in clean:
        base = {(c.contact_kind.value, c.value) for c in extract_contacts(row["text"], desk_bundle)}
        for kind, value in row["expected"]:
            for rule in range(1, 6):
                text = perturb(row["text"], value, rule)
                if text is None:
                    continue
                got = {(c.contact_kind.value, c.value) for c in extract_contacts(text, desk_bundle)}
                assert got == base, (rule, text)
                checked += 1
    assert checked >= 60


def test_contact_corpus_outputs_are_grammar_valid(desk_bundle, fixtures_dir):
    for row in read_jsonl(fixtures_dir / "contacts_50.jsonl"):
        for c in extract_contacts(row["text"], desk_bundle):
            assert is_valid_contact(c.contact_kind.value, c.value)


# -- keywords --------------------------------------------------------------


def test_keyword_examples(desk_bundle):
    assert "cheapfifa23coins.com" in extract_keywords("✅正品球衣 cheapfifa23coins.com 全国包邮", desk_bundle.segment)
    assert extract_keywords("今天 天气 不错", desk_bundle.segment) == []
    assert "询telegram:@ts775" in extract_keywords("办证【询telegram:@ts775】", desk_bundle.segment)


def test_keywords_in_text_order_without_duplicates(desk_bundle):
    kws = extract_keywords("a.com【tg:@ts775】a.com|b.net", desk_bundle.segment)
    assert kws.count("a.com") == 1
    assert kws.index("a.com") < kws.index("b.net")


def test_fixture_file_is_well_formed(fixtures_dir):
    rows = read_jsonl(fixtures_dir / "contacts_50.jsonl")
    assert len(rows) == 50
    kinds = {k for r in rows for k, _ in r["expected"]}
    assert kinds == {"QQ", "Phone", "Telegram", "WeChat", "Website"}
    assert {r["evasion_rule"] for r in rows} == {None, 1, 2, 3, 4, 5}
    assert any("telegram:@ts775" in r["text"] for r in rows)
    json.dumps(rows, ensure_ascii=False)
