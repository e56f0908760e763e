"""Candidate scoring, per-department diversification, and the full
recommend-with-explanations pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..catalog import Catalog, EnrollmentHistory
from ..explainer import Explanation, MATCH_THRESHOLD, TOP_N_SKILLS, build_explanation
from .masking import MASK_TOKEN, MaskedBatch, sequence_from_history
from .model import ModelParams, model_forward

DEFAULT_K = 5


@dataclass(frozen=True)
class ScoredCourse:
    course_id: str
    score: float
    department: str


@dataclass
class RecommendationList:
    entries: list[ScoredCourse] = field(default_factory=list)

    def __post_init__(self):
        scores = [e.score for e in self.entries]
        if any(b > a for a, b in zip(scores, scores[1:])):
            raise ValueError("scores must be non-increasing")
        depts = [e.department for e in self.entries]
        if len(set(depts)) != len(depts):
            raise ValueError("departments must be pairwise distinct")

    def __len__(self) -> int:
        return len(self.entries)

    def course_ids(self) -> list[str]:
        return [e.course_id for e in self.entries]


def score_candidates(params: ModelParams, history: EnrollmentHistory,
                     catalog: Catalog) -> list[ScoredCourse]:
    """Model scores for every recommendable, not-yet-taken course.

    One masked slot is appended after the last semester and its score vector
    ranks the candidates. Ties break on course id so output is deterministic.
    """
    seq = sequence_from_history(history)
    n_next = len(history.semesters)
    batch = MaskedBatch(
        input_items=seq.items + [MASK_TOKEN],
        positions=seq.positions + [n_next],
        majors=seq.majors,
        target_indices=[len(seq.items)],
        # target is a placeholder; only the forward scores are used
        target_items=[params.vocab.course_ids[0]],
        mask_rate=1.0,
    )
    logits, _ = model_forward(params, batch)
    scores = logits[0]
    taken = history.all_courses()
    out = []
    for idx, cid in enumerate(params.vocab.course_ids):
        if cid in taken or cid not in catalog:
            continue
        course = catalog.get(cid)
        if not course.recommendable:
            continue
        out.append(ScoredCourse(cid, float(scores[idx]), course.department))
    out.sort(key=lambda s: (-s.score, s.course_id))
    return out


def scored_from_dict(score_map: dict[str, float], history: EnrollmentHistory,
                     catalog: Catalog) -> list[ScoredCourse]:
    """Apply the same exclusion/recommendable filtering to any scorer's map."""
    taken = history.all_courses()
    out = []
    for cid, score in score_map.items():
        if cid in taken or cid not in catalog:
            continue
        course = catalog.get(cid)
        if not course.recommendable:
            continue
        out.append(ScoredCourse(cid, float(score), course.department))
    out.sort(key=lambda s: (-s.score, s.course_id))
    return out


class ModelScorer:
    """Adapter giving the trained model the plain scorer interface."""

    def __init__(self, params: ModelParams, catalog: Catalog):
        self.params = params
        self.catalog = catalog

    def __call__(self, history: EnrollmentHistory) -> list[ScoredCourse]:
        return score_candidates(self.params, history, self.catalog)


def diversify(scored: list[ScoredCourse], k: int = DEFAULT_K) -> RecommendationList:
    """Greedy scan keeping the first (highest-scored) course per department,
    stopping at k. Fewer than k come back when departments run out."""
    scores = [s.score for s in scored]
    if any(b > a for a, b in zip(scores, scores[1:])):
        raise ValueError("diversify expects scores sorted descending")
    seen: set[str] = set()
    picked: list[ScoredCourse] = []
    for cand in scored:
        if cand.department in seen:
            continue
        picked.append(cand)
        seen.add(cand.department)
        if len(picked) == k:
            break
    return RecommendationList(entries=picked)


@dataclass
class RecommendationResult:
    student_id: str
    recommendations: RecommendationList
    explanations: dict[str, Explanation]
    presentation_order: list[str]       # course ids, shuffled for display
    seed: int


def recommend(student_id: str, history: EnrollmentHistory, catalog: Catalog,
              params: ModelParams, store, seed: int = 0, k: int = DEFAULT_K,
              n_skills: int = TOP_N_SKILLS,
              threshold: float = MATCH_THRESHOLD) -> RecommendationResult:
    """Score, diversify, explain each pick, and attach a seeded presentation
    shuffle (stored apart from the score order)."""
    scored = score_candidates(params, history, catalog)
    recs = diversify(scored, k=k)
    explanations = {
        e.course_id: build_explanation(catalog.get(e.course_id), history, catalog,
                                       store, n=n_skills, threshold=threshold)
        for e in recs.entries
    }
    order = list(recs.course_ids())
    rng = np.random.default_rng(seed)
    rng.shuffle(order)
    return RecommendationResult(
        student_id=student_id,
        recommendations=recs,
        explanations=explanations,
        presentation_order=order,
        seed=seed,
    )
