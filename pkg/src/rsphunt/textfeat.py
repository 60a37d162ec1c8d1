"""Hand-crafted feature vectors for the binary IPT and contact-segment classifiers.

Both extractors are pure functions of the input text. The sklearn transformers
at the bottom wrap them so they compose with pipelines.
"""

from __future__ import annotations

import unicodedata
from dataclasses import astuple, dataclass, fields

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .extract.urls import extract_urls

BRACKETS = frozenset("{}[]【】『』")

IM_PATTERNS = (
    "微信", "q微", "扣微", "微", "薇", "扣扣", "qq", "www", "com", "fun",
    "cc", "tg", "telegram", "飞机", "@", "网", "V信",
)
CONTACT_INDICATORS = (
    "微信", "q微", "扣微", "微", "薇", "扣扣", "qq", "com", "fun", "cc",
    "hash", "tg", "telegram", "飞机", "@", "网", "复制",
)
FILE_SUFFIXES = (
    ".html", ".shtml", ".htm", ".php", ".pdf", ".jpg", ".jpeg", ".png",
    ".xlsx", ".docx", ".pptx", ".xml",
)
SEPARATOR_PUNCT = frozenset(".:：·ͺ-")

_EMOJI_RANGES = ((0x1F000, 0x1FAFF), (0x2600, 0x27BF), (0xFE0F, 0xFE0F))


def is_symbol(ch: str) -> bool:
    """Unicode symbol categories (S*) plus emoji presentation code points."""
    if unicodedata.category(ch).startswith("S"):
        return True
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _EMOJI_RANGES)


def is_digit(ch: str) -> bool:
    return unicodedata.category(ch) == "Nd"


def count_patterns(text: str, patterns) -> int:
    """Case-insensitive, non-overlapping matches; at each position the longest pattern wins."""
    pats = sorted({p.lower() for p in patterns}, key=len, reverse=True)
    i, n, count = 0, len(text), 0
    while i < n:
        for p in pats:
            if text[i:i + len(p)].lower() == p:
                count += 1
                i += len(p)
                break
        else:
            i += 1
    return count


def has_file_suffix(text: str) -> bool:
    low = text.lower()
    return any(s in low for s in FILE_SUFFIXES)


@dataclass(frozen=True)
class BinaryIptFeatures:
    char_len: int
    bracket_count: int
    url_count: int
    digit_count: int
    symbol_count: int
    im_pattern_count: int
    has_file_suffix: bool

    def as_array(self) -> list[int]:
        return [int(v) for v in astuple(self)]


@dataclass(frozen=True)
class ContactSegmentFeatures:
    char_len: int
    url_count: int
    non_alnum_count: int
    alnum_count: int
    digit_count: int
    contact_indicator_count: int
    separator_punct_count: int
    has_file_suffix: bool

    def as_array(self) -> list[int]:
        return [int(v) for v in astuple(self)]


BINARY_FEATURE_NAMES = tuple(f.name for f in fields(BinaryIptFeatures))
CONTACT_FEATURE_NAMES = tuple(f.name for f in fields(ContactSegmentFeatures))


def binary_ipt_features(text: str) -> BinaryIptFeatures:
    return BinaryIptFeatures(
        char_len=len(text),
        bracket_count=sum(ch in BRACKETS for ch in text),
        url_count=len(extract_urls(text)),
        digit_count=sum(is_digit(ch) for ch in text),
        symbol_count=sum(is_symbol(ch) for ch in text),
        im_pattern_count=count_patterns(text, IM_PATTERNS),
        has_file_suffix=has_file_suffix(text),
    )


def contact_segment_features(segment: str) -> ContactSegmentFeatures:
    alnum = sum(ch.isalnum() for ch in segment)
    return ContactSegmentFeatures(
        char_len=len(segment),
        url_count=len(extract_urls(segment)),
        non_alnum_count=len(segment) - alnum,
        alnum_count=alnum,
        digit_count=sum(is_digit(ch) for ch in segment),
        contact_indicator_count=count_patterns(segment, CONTACT_INDICATORS),
        separator_punct_count=sum(ch in SEPARATOR_PUNCT for ch in segment),
        has_file_suffix=has_file_suffix(segment),
    )


class _TextFeaturizer(BaseEstimator, TransformerMixin):
    """Stateless text -> fixed-order numeric array transformer."""

    extractor = None
    feature_names: tuple[str, ...] = ()

    def fit(self, X=None, y=None):
        self.n_features_out_ = len(self.feature_names)
        return self

    def transform(self, X):
        if isinstance(X, str):
            raise TypeError("expected an iterable of strings, got a single string")
        rows = [type(self).extractor(text).as_array() for text in X]
        return np.asarray(rows, dtype=np.float64).reshape(len(rows), len(self.feature_names))

    def get_feature_names_out(self, input_features=None):
        return np.asarray(self.feature_names, dtype=object)


class BinaryIptFeaturizer(_TextFeaturizer):
    extractor = staticmethod(binary_ipt_features)
    feature_names = BINARY_FEATURE_NAMES


class ContactSegmentFeaturizer(_TextFeaturizer):
    extractor = staticmethod(contact_segment_features)
    feature_names = CONTACT_FEATURE_NAMES
