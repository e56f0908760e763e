"""Span extraction from label paths, multi-tagger combination, and the
post-processing that turns raw spans into a clean skill set."""

from __future__ import annotations

from dataclasses import dataclass

from .labels import O, B_CON, I_CON
from .tokenize import TokenizedText

DEFAULT_STOPLIST = frozenset({
    "homework", "student", "students", "seminar", "course", "lecture",
    "class", "exam",
})


@dataclass(frozen=True)
class SkillSpan:
    text: str
    token_start: int
    token_end: int
    votes: int = 1

    def __post_init__(self):
        if not self.token_start < self.token_end:
            raise ValueError("span must satisfy token_start < token_end")
        if self.votes < 1:
            raise ValueError("votes must be >= 1")

    @property
    def length(self) -> int:
        return self.token_end - self.token_start

    def word_count(self) -> int:
        return len(self.text.split())


def spans_from_tags(path: list[int], text: TokenizedText) -> list[SkillSpan]:
    """Read BIO labels into spans.

    Each maximal B-CON + following I-CONs is one span. An I-CON at the start
    or straight after an O cannot continue anything, so it is repaired as a
    span start.
    """
    if len(path) != len(text.tokens):
        raise ValueError("label path length must equal token count")
    spans: list[SkillSpan] = []
    start: int | None = None
    for i, y in enumerate(path):
        if y == B_CON:
            if start is not None:
                spans.append(_make_span(text, start, i))
            start = i
        elif y == I_CON:
            if start is None:
                start = i  # repair: orphan I-CON opens a span
        else:
            if start is not None:
                spans.append(_make_span(text, start, i))
                start = None
    if start is not None:
        spans.append(_make_span(text, start, len(path)))
    return spans


def _make_span(text: TokenizedText, start: int, end: int) -> SkillSpan:
    return SkillSpan(text=text.detokenize(start, end), token_start=start,
                     token_end=end, votes=1)


def ensemble_combine(span_sets: list[list[SkillSpan]]) -> list[SkillSpan]:
    """Union the span sets of several taggers over the same tokenization.

    Spans are identified by their (token_start, token_end) range; votes add
    up across contributors. Output order: votes desc, span length desc,
    token_start asc.
    """
    if not span_sets:
        raise ValueError("ensemble needs at least one tagger output")
    merged: dict[tuple[int, int], SkillSpan] = {}
    for spans in span_sets:
        for sp in spans:
            key = (sp.token_start, sp.token_end)
            if key in merged:
                prev = merged[key]
                merged[key] = SkillSpan(prev.text, prev.token_start, prev.token_end,
                                        prev.votes + sp.votes)
            else:
                merged[key] = sp
    return sorted(merged.values(),
                  key=lambda s: (-s.votes, -s.length, s.token_start))


def _plural_strip(text: str) -> str:
    """Canonical key for plural consolidation: drop trailing 'es', else 's'."""
    if text.endswith("es"):
        return text[:-2]
    if text.endswith("s"):
        return text[:-1]
    return text


def postprocess_skills(spans: list[SkillSpan],
                       stoplist: frozenset[str] | set[str] = DEFAULT_STOPLIST,
                       max_words: int = 5) -> list[SkillSpan]:
    """Clean raw ensemble spans into a usable skill list.

    Drops generic skills (stoplist, case-insensitive) and anything longer
    than max_words words, then consolidates singular/plural variants: spans
    whose texts share a plural-stripped form collapse to one entry. A merged
    group takes the stripped form as its surface text and the max votes of
    its members; a group with a single surface form keeps it unchanged.
    """
    stop = {s.lower() for s in stoplist}
    kept = [sp for sp in spans
            if sp.text.lower() not in stop and sp.word_count() <= max_words]

    # A merge can itself create a new plural collision ("buses" -> "bus" next
    # to a lone "bus"), so consolidate to a fixed point.
    while True:
        merged = _consolidate_plurals(kept)
        if len(merged) == len(kept) and all(
                a.text == b.text for a, b in zip(merged, kept)):
            return merged
        kept = merged


def _consolidate_plurals(kept: list[SkillSpan]) -> list[SkillSpan]:
    groups: dict[str, list[SkillSpan]] = {}
    order: list[str] = []
    for sp in kept:
        key = _plural_strip(sp.text.lower())
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(sp)

    out: list[SkillSpan] = []
    for key in order:
        members = groups[key]
        rep = max(members, key=lambda s: (s.votes, -s.token_start))
        texts = {m.text for m in members}
        text = rep.text if len(texts) == 1 else key
        out.append(SkillSpan(text=text, token_start=rep.token_start,
                             token_end=rep.token_end, votes=rep.votes))
    return out
