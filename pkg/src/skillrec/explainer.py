"""Skill-based explanations for a recommended course.

A target course's skills are split into "learned" (soft-matched against the
union of skills from courses the student already took) and "new" (the rest),
then each side is ranked by how relevant the skill is to the target course
description and cut to the top n.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .catalog import Catalog, Course, EnrollmentHistory
from .embeddings import cosine

logger = logging.getLogger(__name__)

MATCH_THRESHOLD = 0.85
TOP_N_SKILLS = 7


@dataclass(frozen=True)
class SkillMatch:
    target_skill: str
    matched_skill: str
    similarity: float


@dataclass(frozen=True)
class RankedSkill:
    text: str
    relevance: float


@dataclass
class Explanation:
    course_id: str
    learned: list[RankedSkill] = field(default_factory=list)
    new: list[RankedSkill] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "course_id": self.course_id,
            "learned": [{"text": s.text, "relevance": round(s.relevance, 6)}
                        for s in self.learned],
            "new": [{"text": s.text, "relevance": round(s.relevance, 6)}
                    for s in self.new],
        }


def _embed_or_none(store, text: str):
    try:
        return store.embed(text)
    except (KeyError, ValueError) as e:
        logger.warning("skipping unembeddable skill %r: %s", text, e)
        return None


def match_skills(target_skills: set[str], taken_skills: set[str], store,
                 threshold: float = MATCH_THRESHOLD) -> list[SkillMatch]:
    """All (target, taken) pairs whose cosine strictly exceeds the threshold.

    Identical strings always match with similarity 1.0, whatever the store
    says. Skills without a resolvable embedding are skipped, not fatal.
    """
    matches: list[SkillMatch] = []
    taken_vecs = {}
    for skill in taken_skills:
        taken_vecs[skill] = _embed_or_none(store, skill)
    for target in sorted(target_skills):
        target_vec = None
        target_vec_known = False
        for taken in sorted(taken_skills):
            if target == taken:
                matches.append(SkillMatch(target, taken, 1.0))
                continue
            if not target_vec_known:
                target_vec = _embed_or_none(store, target)
                target_vec_known = True
            if target_vec is None or taken_vecs[taken] is None:
                continue
            sim = cosine(target_vec, taken_vecs[taken])
            if sim > threshold:
                matches.append(SkillMatch(target, taken, sim))
    return matches


def taken_skill_union(history: EnrollmentHistory, catalog: Catalog) -> set[str]:
    """Union of extracted skills over every course in the student's history."""
    union: set[str] = set()
    for cid in history.all_courses():
        union.update(catalog.get(cid).skill_texts())
    return union


def partition_skills(target: Course, history: EnrollmentHistory, catalog: Catalog,
                     store, threshold: float = MATCH_THRESHOLD
                     ) -> tuple[set[str], set[str]]:
    """Split the target's skills into (learned, new).

    learned: target skills with at least one soft match into the union of
    taken-course skills; new: the remainder. The two sets partition the
    target skill set exactly.
    """
    target_skills = set(target.skill_texts())
    if not target_skills:
        logger.warning("course %r has no extracted skills to explain", target.id)
        return set(), set()
    taken = taken_skill_union(history, catalog)
    matches = match_skills(target_skills, taken, store, threshold=threshold)
    learned = {m.target_skill for m in matches}
    new = target_skills - learned
    return learned, new


def rank_skills(skills: set[str], course: Course, store) -> list[RankedSkill]:
    """Order skills by cosine relevance to the course description.

    Relevance is clamped into [0, 1] (raw cosine can go negative with some
    encoders). Ties break alphabetically.
    """
    desc_vec = store.embed(course.description)
    ranked: list[RankedSkill] = []
    for skill in skills:
        vec = _embed_or_none(store, skill)
        if vec is None:
            continue
        relevance = float(min(1.0, max(0.0, cosine(vec, desc_vec))))
        ranked.append(RankedSkill(skill, relevance))
    ranked.sort(key=lambda s: (-s.relevance, s.text))
    return ranked


def build_explanation(target: Course, history: EnrollmentHistory, catalog: Catalog,
                      store, n: int = TOP_N_SKILLS,
                      threshold: float = MATCH_THRESHOLD) -> Explanation:
    """Partition, rank each side, keep the top n (lists may come up short)."""
    learned, new = partition_skills(target, history, catalog, store,
                                    threshold=threshold)
    return Explanation(
        course_id=target.id,
        learned=rank_skills(learned, target, store)[:n],
        new=rank_skills(new, target, store)[:n],
    )
