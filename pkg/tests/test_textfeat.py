from __future__ import annotations

import random
from dataclasses import asdict

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from rsphunt.textfeat import (
    BINARY_FEATURE_NAMES,
    CONTACT_FEATURE_NAMES,
    BinaryIptFeaturizer,
    ContactSegmentFeaturizer,
    binary_ipt_features,
    contact_segment_features,
)

from oracles import naive_binary_features, naive_contact_features

# single characters and multi-char tokens mixed so random strings hit patterns, URLs and suffixes
FRAGMENTS = (
    list("微信扣薇飞机网复制普通加询【】『』{}[]abcxyzQTV0189１٣ .:：·ͺ-@/?#_✅🔥★©$+")
    + ["qq", "telegram", "www", "com", "fun", "cc", "tg", "hash", "V信", "q微", ".html", ".PHP",
       "https://", "a.com", "b.cc/x?y=1", "www.site.net", "x.y.zz", "a..com", "-a.com", "a-.com",
       "foo.com:8080/p", "中.com", "v信", "t.me/abc", "abc.xyz.", "9.99"]
)


def mixed_strings(n: int, seed: int) -> list[str]:
    rng = random.Random(seed)
    return ["".join(rng.choice(FRAGMENTS) for _ in range(rng.randint(0, 25))) for _ in range(n)]


def test_empty_string_is_all_zero():
    assert binary_ipt_features("").as_array() == [0] * 7
    assert contact_segment_features("").as_array() == [0] * 8


def test_longest_match_suppresses_inner_pattern():
    f = binary_ipt_features("加微信qq123")
    assert f.im_pattern_count == 2 and f.digit_count == 3


def test_url_and_suffix():
    f = binary_ipt_features("see https://a.com/x.html")
    assert f.url_count == 1 and f.has_file_suffix


def test_contact_segment_example():
    f = contact_segment_features("telegram:@ts775")
    assert (f.contact_indicator_count, f.separator_punct_count, f.digit_count) == (2, 1, 3)
    assert contact_segment_features("普通句子。").contact_indicator_count == 0


def test_v_xin_is_case_insensitive():
    assert binary_ipt_features("v信").im_pattern_count == binary_ipt_features("V信").im_pattern_count == 1


def test_matches_naive_oracle_on_mixed_strings():
    for s in mixed_strings(1000, seed=21):
        assert asdict(binary_ipt_features(s)) == naive_binary_features(s), s
        assert asdict(contact_segment_features(s)) == naive_contact_features(s), s


@settings(max_examples=300)
@given(st.lists(st.sampled_from(FRAGMENTS), max_size=20).map("".join))
def test_invariants(s):
    b = binary_ipt_features(s)
    assert all(v >= 0 for v in b.as_array())
    assert all(b.char_len >= v for v in (b.bracket_count, b.digit_count, b.symbol_count))
    c = contact_segment_features(s)
    assert c.alnum_count + c.non_alnum_count == c.char_len
    assert binary_ipt_features(s) == b  # pure


@settings(max_examples=200)
@given(st.text(max_size=30), st.sampled_from(list("{}[]【】『』")))
def test_appending_a_bracket(s, br):
    before, after = binary_ipt_features(s), binary_ipt_features(s + br)
    assert after.bracket_count == before.bracket_count + 1
    assert after.char_len == before.char_len + 1
    assert after.url_count == before.url_count


def test_featurizers_fixed_order():
    texts = ["加微信qq123", "telegram:@ts775"]
    Xb = BinaryIptFeaturizer().fit_transform(texts)
    Xc = ContactSegmentFeaturizer().fit_transform(texts)
    assert Xb.shape == (2, 7) and Xc.shape == (2, 8)
    assert list(BinaryIptFeaturizer().fit().get_feature_names_out()) == list(BINARY_FEATURE_NAMES)
    assert BINARY_FEATURE_NAMES == ("char_len", "bracket_count", "url_count", "digit_count",
                                    "symbol_count", "im_pattern_count", "has_file_suffix")
    assert len(CONTACT_FEATURE_NAMES) == 8
    np.testing.assert_array_equal(Xb[0], binary_ipt_features(texts[0]).as_array())
