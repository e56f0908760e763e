"""End-to-end skill extraction: tokenize per tagger, decode, combine, clean."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..catalog import Course
from .crf import TransitionMatrix, viterbi_decode
from .providers import LexiconProvider, provider_from_config
from .spans import SkillSpan, spans_from_tags, ensemble_combine, postprocess_skills, \
    DEFAULT_STOPLIST
from .tokenize import tokenize

MODEL_FORMAT_VERSION = 1


@dataclass
class Tagger:
    """One base tagger: an emission provider plus chain transitions."""
    provider: object
    transitions: TransitionMatrix
    casing_mode: str = "uncased"

    def tag(self, text: str) -> list[SkillSpan]:
        tok = tokenize(text, casing_mode=self.casing_mode)
        if not tok.tokens:
            return []
        path = viterbi_decode(self.provider.emissions(tok), self.transitions)
        return spans_from_tags(path, tok)

    @classmethod
    def from_lexicon(cls, phrases, casing_mode: str = "uncased") -> "Tagger":
        return cls(provider=LexiconProvider(phrases, casing_mode=casing_mode),
                   transitions=TransitionMatrix(), casing_mode=casing_mode)


def extract_skills(course: Course, taggers: list[Tagger],
                   stoplist=DEFAULT_STOPLIST) -> list[SkillSpan]:
    """Run every tagger on the course description, combine, post-process.

    The cleaned spans are also stored on course.skills.
    """
    if not course.description.strip():
        raise ValueError(f"course {course.id!r} has an empty description")
    if not taggers:
        raise ValueError("need at least one tagger")
    span_sets = [t.tag(course.description) for t in taggers]
    combined = ensemble_combine(span_sets)
    skills = postprocess_skills(combined, stoplist=stoplist)
    course.skills = skills
    return skills


def save_tagger(tagger: Tagger, path: str | Path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "casing_mode": tagger.casing_mode,
        "transitions": {
            "scores": tagger.transitions.scores.tolist(),
            "start": tagger.transitions.start.tolist(),
            "stop": tagger.transitions.stop.tolist(),
        },
        "provider": tagger.provider.config(),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_tagger(path: str | Path) -> Tagger:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported tagger model version "
                         f"{payload.get('format_version')!r}")
    tr = payload["transitions"]
    transitions = TransitionMatrix(tr["scores"], tr["start"], tr["stop"])
    provider = provider_from_config(payload["provider"])
    return Tagger(provider=provider, transitions=transitions,
                  casing_mode=payload["casing_mode"])


def load_phrase_file(path: str | Path) -> list[str]:
    """Gazetteer/stoplist file: UTF-8, one phrase per line, blanks ignored."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [ln.strip() for ln in lines if ln.strip()]
