"""Whitespace + edge-punctuation tokenization with character offsets."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

_CHUNK = re.compile(r"\S+")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


@dataclass
class TokenizedText:
    source: str
    tokens: list[str]
    char_offsets: list[tuple[int, int]]
    casing_mode: str = "cased"

    def __len__(self) -> int:
        return len(self.tokens)

    def detokenize(self, start: int, end: int) -> str:
        """Source substring spanned by tokens [start, end); lowercased in uncased mode."""
        if start >= end:
            return ""
        s = self.char_offsets[start][0]
        e = self.char_offsets[end - 1][1]
        text = self.source[s:e]
        return text.lower() if self.casing_mode == "uncased" else text


def tokenize(text: str, casing_mode: str = "cased") -> TokenizedText:
    """Split on Unicode whitespace, then peel punctuation off token edges.

    Edge punctuation becomes its own single-character token so phrases inside
    parentheses or before commas come out clean. Offsets always index into the
    original string; only the token strings are lowercased in uncased mode.
    """
    if casing_mode not in ("cased", "uncased"):
        raise ValueError(f"unknown casing_mode {casing_mode!r}")
    tokens: list[str] = []
    offsets: list[tuple[int, int]] = []
    for m in _CHUNK.finditer(text):
        s, e = m.start(), m.end()
        # Peel leading punctuation.
        while s < e and _is_punct(text[s]) and e - s > 1:
            tokens.append(text[s])
            offsets.append((s, s + 1))
            s += 1
        # Peel trailing punctuation (collect, then emit in source order).
        trail: list[tuple[int, int]] = []
        while e > s and _is_punct(text[e - 1]) and e - s > 1:
            trail.append((e - 1, e))
            e -= 1
        tokens.append(text[s:e])
        offsets.append((s, e))
        for ts, te in reversed(trail):
            tokens.append(text[ts:te])
            offsets.append((ts, te))
    if casing_mode == "uncased":
        tokens = [t.lower() for t in tokens]
    return TokenizedText(source=text, tokens=tokens, char_offsets=offsets,
                         casing_mode=casing_mode)
