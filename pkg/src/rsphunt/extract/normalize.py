"""Undo common contact-obfuscation tricks before entity extraction.

Five rewrite rules run in a fixed order, and the whole sequence repeats until
a pass changes nothing, so the result is a fixpoint:

1. compatibility folding of fullwidth and stylized characters to ASCII
2. confusable lookalikes (Cyrillic/Greek letters, circled digits) to ASCII
3. ``。``/``点``/``｡`` between ASCII alphanumerics to ``.``
4. removal of zero-width and joiner characters
5. removal of a single decorative symbol splitting an otherwise valid
   contact token, e.g. ``123★456`` or ``ts★775``

Every edit is recorded with its offset in the string as it stood when the edit
was made, so edits replay left to right on the original text.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..grammars import TELEGRAM_RE, WECHAT_RE
from ..textfeat import is_symbol

RULE_FOLD = 1
RULE_CONFUSABLE = 2
RULE_DOT = 3
RULE_ZERO_WIDTH = 4
RULE_DECORATION = 5

ZERO_WIDTH = frozenset("​‌‍‎‏⁠⁡⁢⁣⁤﻿­᠎")
_DOT_RE = re.compile(r"(?<=[A-Za-z0-9])[。点｡](?=[A-Za-z0-9])")
_TOKEN_CHARS = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-")
_DIGIT_TOKEN_RE = re.compile(r"^\+?[0-9]{5,15}$")
_MAX_PASSES = 8


@dataclass(frozen=True)
class Edit:
    offset: int
    original: str
    replacement: str
    rule: int


def load_confusables(path: str | Path | None = None) -> dict[str, str]:
    """Read a ``codepoint<TAB>replacement`` table; ``#`` starts a comment."""
    if path is None:
        text = resources.files("rsphunt.data").joinpath("confusables.tsv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    table = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        cp, _, repl = line.partition("\t")
        table[chr(int(cp.strip(), 16))] = repl.strip()
    return table


@lru_cache(maxsize=1)
def default_confusables() -> dict[str, str]:
    return load_confusables()


def _fold(ch: str) -> str | None:
    if ord(ch) < 0x80:
        return None
    folded = unicodedata.normalize("NFKC", ch)
    if len(folded) == 1 and 0x20 <= ord(folded) < 0x7F:
        return folded
    return None


def _rule_edits(rule: int, text: str, confusables: dict[str, str]) -> list[tuple[int, str, str]]:
    """Non-overlapping (offset, original, replacement) edits for one rule, offsets into ``text``."""
    out = []
    if rule == RULE_FOLD:
        for i, ch in enumerate(text):
            if ch not in confusables:
                folded = _fold(ch)
                if folded is not None:
                    out.append((i, ch, folded))
    elif rule == RULE_CONFUSABLE:
        for i, ch in enumerate(text):
            if ch in confusables:
                out.append((i, ch, confusables[ch]))
    elif rule == RULE_DOT:
        out = [(m.start(), m.group(), ".") for m in _DOT_RE.finditer(text)]
    elif rule == RULE_ZERO_WIDTH:
        out = [(i, ch, "") for i, ch in enumerate(text) if ch in ZERO_WIDTH]
    elif rule == RULE_DECORATION:
        for i, ch in enumerate(text):
            if ord(ch) < 0x80 or not is_symbol(ch):
                continue
            lo = i
            while lo > 0 and text[lo - 1] in _TOKEN_CHARS:
                lo -= 1
            hi = i + 1
            while hi < len(text) and text[hi] in _TOKEN_CHARS:
                hi += 1
            if lo == i or hi == i + 1:
                continue
            if _valid_split_token(text[lo:i] + text[i + 1:hi]):
                out.append((i, ch, ""))
    else:
        raise ValueError(f"unknown rule {rule}")
    return out


def _valid_split_token(token: str) -> bool:
    if _DIGIT_TOKEN_RE.match(token):
        return True
    has_digit = any(c.isdigit() for c in token)
    return has_digit and bool(TELEGRAM_RE.match(token) or WECHAT_RE.match(token))


@dataclass(frozen=True)
class NormalizationTrace:
    original: str
    normalized_text: str
    edits: tuple[Edit, ...]
    # origin span in ``original`` of each character of ``normalized_text``
    origins: tuple[tuple[int, int], ...] = field(repr=False, compare=False, default=())

    def replay(self, text: str | None = None) -> str:
        """Apply the recorded edits in order to ``text`` (default: the original)."""
        s = self.original if text is None else text
        for e in self.edits:
            if s[e.offset:e.offset + len(e.original)] != e.original:
                raise ValueError(f"edit {e} does not apply at offset {e.offset}")
            s = s[:e.offset] + e.replacement + s[e.offset + len(e.original):]
        return s

    def to_original_span(self, start: int, end: int) -> tuple[int, int]:
        """Map a span of ``normalized_text`` back to the covering span of ``original``."""
        if not 0 <= start <= end <= len(self.normalized_text):
            raise ValueError(f"span {(start, end)} out of range")
        if start == end:
            if start < len(self.origins):
                return self.origins[start][0], self.origins[start][0]
            return len(self.original), len(self.original)
        return self.origins[start][0], self.origins[end - 1][1]


def normalize_evasions(text: str, confusables: dict[str, str] | None = None) -> NormalizationTrace:
    table = default_confusables() if confusables is None else confusables
    current = text
    origins = [(i, i + 1) for i in range(len(text))]
    edits: list[Edit] = []
    for _ in range(_MAX_PASSES):
        changed = False
        for rule in (RULE_FOLD, RULE_CONFUSABLE, RULE_DOT, RULE_ZERO_WIDTH, RULE_DECORATION):
            shift = 0
            pieces, cursor = [], 0
            new_origins: list[tuple[int, int]] = []
            for offset, orig, repl in _rule_edits(rule, current, table):
                pieces.append(current[cursor:offset])
                new_origins.extend(origins[cursor:offset])
                pieces.append(repl)
                covered = (origins[offset][0], origins[offset + len(orig) - 1][1])
                new_origins.extend([covered] * len(repl))
                cursor = offset + len(orig)
                edits.append(Edit(offset + shift, orig, repl, rule))
                shift += len(repl) - len(orig)
                changed = True
            if cursor:
                pieces.append(current[cursor:])
                new_origins.extend(origins[cursor:])
                current = "".join(pieces)
                origins = new_origins
        if not changed:
            break
    return NormalizationTrace(text, current, tuple(edits), tuple(origins))
