"""Evaluation harness: span extraction metrics, rater agreement, offline
recall@k, and survey aggregation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .catalog import Catalog, EnrollmentHistory
from .recommender.ranking import ScoredCourse, diversify


@dataclass
class MetricsReport:
    precision: float
    recall: float
    f1: float
    support_gold: int = 0
    support_pred: int = 0

    def to_dict(self) -> dict:
        return {
            "precision": round(self.precision, 6),
            "recall": round(self.recall, 6),
            "f1": round(self.f1, 6),
            "support_gold": self.support_gold,
            "support_pred": self.support_pred,
        }

    def to_text(self) -> str:
        return (f"precision {self.precision:8.4f}\n"
                f"recall    {self.recall:8.4f}\n"
                f"f1        {self.f1:8.4f}\n"
                f"gold spans {self.support_gold}, predicted spans {self.support_pred}")


def _prf(tp: int, n_pred: int, n_gold: int) -> tuple[float, float, float]:
    p = tp / n_pred if n_pred else 0.0
    r = tp / n_gold if n_gold else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f1


def span_prf(gold: dict[str, set], predicted: dict[str, set],
             mode: str = "micro") -> MetricsReport:
    """Exact-boundary span precision/recall/F1.

    gold and predicted map course id -> set of spans (any hashable span
    representation; (start, end) tuples in practice). micro pools counts over
    all courses; macro averages the per-course scores.
    """
    if set(gold) != set(predicted):
        missing = set(gold) ^ set(predicted)
        raise ValueError(f"gold/predicted course ids differ: {sorted(missing)[:5]}")
    if mode not in ("micro", "macro"):
        raise ValueError(f"unknown mode {mode!r}")

    n_gold = sum(len(s) for s in gold.values())
    n_pred = sum(len(s) for s in predicted.values())
    if mode == "micro":
        tp = sum(len(set(gold[c]) & set(predicted[c])) for c in gold)
        p, r, f1 = _prf(tp, n_pred, n_gold)
    else:
        per = [_prf(len(set(gold[c]) & set(predicted[c])),
                    len(predicted[c]), len(gold[c])) for c in sorted(gold)]
        p = float(np.mean([x[0] for x in per])) if per else 0.0
        r = float(np.mean([x[1] for x in per])) if per else 0.0
        f1 = float(np.mean([x[2] for x in per])) if per else 0.0
    return MetricsReport(p, r, f1, support_gold=n_gold, support_pred=n_pred)


def proportional_agreement(ratings_a: list, ratings_b: list) -> float:
    """Fraction of positions where the two raters agree."""
    if len(ratings_a) != len(ratings_b):
        raise ValueError("rating lists must have equal length")
    if not ratings_a:
        raise ValueError("rating lists are empty")
    agree = sum(1 for a, b in zip(ratings_a, ratings_b) if a == b)
    return agree / len(ratings_a)


def cohen_kappa(ratings_a: list, ratings_b: list) -> float:
    """Chance-corrected agreement (p_o - p_e) / (1 - p_e).

    Expected agreement p_e comes from the two raters' marginal label rates.
    When p_e == 1 the statistic is defined as 1 for perfect agreement and is
    an error otherwise (the denominator vanishes).
    """
    if len(ratings_a) != len(ratings_b):
        raise ValueError("rating lists must have equal length")
    if not ratings_a:
        raise ValueError("rating lists are empty")
    n = len(ratings_a)
    p_o = proportional_agreement(ratings_a, ratings_b)
    labels = sorted(set(ratings_a) | set(ratings_b))
    p_e = sum((ratings_a.count(lbl) / n) * (ratings_b.count(lbl) / n)
              for lbl in labels)
    if abs(1.0 - p_e) < 1e-12:
        if abs(1.0 - p_o) < 1e-12:
            return 1.0
        raise ValueError("kappa undefined: expected agreement is 1 but observed is not")
    return (p_o - p_e) / (1.0 - p_e)


def recall_at_k(scorer, histories: list[EnrollmentHistory], catalog: Catalog,
                k: int = 5, diversified: bool = False) -> float:
    """Offline next-semester proxy: mask each student's final semester, ask the
    scorer for candidates from the prefix, and measure overlap at k.

    scorer(prefix_history) must return a descending list of ScoredCourse with
    taken/non-recommendable courses already excluded.
    """
    if not histories:
        raise ValueError("no held-out histories")
    recalls = []
    for hist in histories:
        if len(hist.semesters) < 2:
            raise ValueError(f"student {hist.student_id!r} needs >= 2 semesters")
        actual = set(hist.semesters[-1])
        prefix = EnrollmentHistory(student_id=hist.student_id,
                                   semesters=[set(s) for s in hist.semesters[:-1]],
                                   major=list(hist.major))
        scored = scorer(prefix)
        if diversified:
            top = diversify(scored, k=k).course_ids()
        else:
            top = [s.course_id for s in scored[:k]]
        denom = min(k, len(actual))
        recalls.append(len(set(top) & actual) / denom if denom else 0.0)
    return float(np.mean(recalls))


def random_scorer(catalog: Catalog, seed: int):
    """Uniform random scorer with the standard exclusion rules, for baselines."""
    rng = np.random.default_rng(seed)

    def score(history: EnrollmentHistory) -> list[ScoredCourse]:
        taken = history.all_courses()
        out = [ScoredCourse(c.id, float(rng.random()), c.department)
               for c in catalog.recommendable_courses() if c.id not in taken]
        out.sort(key=lambda s: (-s.score, s.course_id))
        return out

    return score


# ---------------------------------------------------------------------------
# Survey aggregation
# ---------------------------------------------------------------------------

CONDITIONS = ("exp", "no-exp")
EXP_ONLY_QUESTIONS = ("q4", "q5")


@dataclass
class SurveyResponse:
    participant_id: str
    course_id: str
    condition: str
    q1: int
    q2: int
    q3: int
    q4: int | None = None
    q5: int | None = None
    major_declared: bool = True

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise ValueError(f"condition must be one of {CONDITIONS}")
        for name in ("q1", "q2", "q3", "q4", "q5"):
            val = getattr(self, name)
            if val is None:
                continue
            if not isinstance(val, int) or not 1 <= val <= 5:
                raise ValueError(f"{name} must be an integer in 1..5")
        if self.condition == "no-exp" and (self.q4 is not None or self.q5 is not None):
            raise ValueError("q4/q5 are only collected under the exp condition")

    @property
    def serendipity(self) -> float:
        """Mean of perceived success (q1) and unexpectedness (q2)."""
        return (self.q1 + self.q2) / 2.0

    def to_dict(self) -> dict:
        rec = {
            "participant_id": self.participant_id,
            "course_id": self.course_id,
            "condition": self.condition,
            "q1": self.q1, "q2": self.q2, "q3": self.q3,
            "major_declared": self.major_declared,
        }
        if self.q4 is not None:
            rec["q4"] = self.q4
        if self.q5 is not None:
            rec["q5"] = self.q5
        return rec

    @classmethod
    def from_dict(cls, rec: dict) -> "SurveyResponse":
        return cls(
            participant_id=str(rec["participant_id"]),
            course_id=str(rec["course_id"]),
            condition=rec["condition"],
            q1=rec["q1"], q2=rec["q2"], q3=rec["q3"],
            q4=rec.get("q4"), q5=rec.get("q5"),
            major_declared=bool(rec.get("major_declared", True)),
        )


@dataclass
class SurveySummary:
    per_condition_means: dict[str, dict[str, float]]
    serendipity_means: dict[str, float]
    neutrality_rates: dict[str, float]      # "condition|declared" -> rate
    neutrality_counts: dict[str, tuple[int, int]]
    q1_q2_correlation: float | None
    n_responses: int

    def to_dict(self) -> dict:
        return {
            "per_condition_means": self.per_condition_means,
            "serendipity_means": self.serendipity_means,
            "neutrality_rates": self.neutrality_rates,
            "neutrality_counts": {k: list(v) for k, v in self.neutrality_counts.items()},
            "q1_q2_correlation": self.q1_q2_correlation,
            "n_responses": self.n_responses,
        }

    def to_text(self) -> str:
        lines = [f"{'condition':10s} {'q':3s} {'mean':>7s}"]
        for cond, qs in sorted(self.per_condition_means.items()):
            for q, m in sorted(qs.items()):
                lines.append(f"{cond:10s} {q:3s} {m:7.3f}")
        lines.append("")
        lines.append(f"{'group':22s} {'neutral':>8s} {'total':>6s} {'rate':>7s}")
        for grp, (num, den) in sorted(self.neutrality_counts.items()):
            lines.append(f"{grp:22s} {num:8d} {den:6d} {self.neutrality_rates[grp]:7.3f}")
        if self.q1_q2_correlation is not None:
            lines.append("")
            lines.append(f"corr(q1, q2) = {self.q1_q2_correlation:.3f}")
        return "\n".join(lines)


def survey_aggregate(responses: list[SurveyResponse]) -> SurveySummary:
    """Descriptive summary: condition means, serendipity, neutrality cross-tab
    over condition x major_declared, and the q1/q2 correlation."""
    per_cond: dict[str, dict[str, list[int]]] = {}
    seren: dict[str, list[float]] = {}
    neutral: dict[str, list[int]] = {}
    q1s, q2s = [], []
    for r in responses:
        cond = per_cond.setdefault(r.condition, {})
        for name in ("q1", "q2", "q3", "q4", "q5"):
            val = getattr(r, name)
            if val is not None:
                cond.setdefault(name, []).append(val)
        seren.setdefault(r.condition, []).append(r.serendipity)
        grp = f"{r.condition}|{'declared' if r.major_declared else 'undeclared'}"
        # Q1-Q3 ratings convert to a neutral flag (rating == 3).
        for val in (r.q1, r.q2, r.q3):
            neutral.setdefault(grp, []).append(1 if val == 3 else 0)
        q1s.append(r.q1)
        q2s.append(r.q2)

    means = {cond: {q: float(np.mean(vals)) for q, vals in qs.items()}
             for cond, qs in per_cond.items()}
    seren_means = {cond: float(np.mean(vals)) for cond, vals in seren.items()}
    rates = {grp: float(np.mean(flags)) for grp, flags in neutral.items()}
    counts = {grp: (int(np.sum(flags)), len(flags)) for grp, flags in neutral.items()}
    corr = None
    if len(q1s) >= 2 and np.std(q1s) > 0 and np.std(q2s) > 0:
        corr = float(np.corrcoef(q1s, q2s)[0, 1])
    return SurveySummary(
        per_condition_means=means,
        serendipity_means=seren_means,
        neutrality_rates=rates,
        neutrality_counts=counts,
        q1_q2_correlation=corr,
        n_responses=len(responses),
    )


def load_survey_responses(path) -> list[SurveyResponse]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(SurveyResponse.from_dict(json.loads(line)))
    return out
