"""Co-occurrence scoring baseline.

score(c | history) = sum over taken courses t of P(c appears after t), with
P estimated from corpus counts under add-one smoothing:

    P(c after t) = (students with t strictly before c + 1)
                   / (students with t anywhere + |vocabulary|)
"""

from __future__ import annotations

from collections import defaultdict

from ..catalog import EnrollmentHistory


class CooccurrenceBaseline:
    def __init__(self, corpus: list[EnrollmentHistory], vocabulary: list[str]):
        if not corpus:
            raise ValueError("baseline needs a nonempty corpus")
        self.vocabulary = list(vocabulary)
        self.n_vocab = len(self.vocabulary)
        self.after_counts: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
        self.has_counts: dict[str, int] = defaultdict(int)
        for hist in corpus:
            seen_before: set[tuple[str, str]] = set()
            later_sets = [set(s) for s in hist.semesters]
            for t in hist.all_courses():
                self.has_counts[t] += 1
            for i, sem in enumerate(later_sets):
                later: set[str] = set()
                for s2 in later_sets[i + 1:]:
                    later |= s2
                for t in sem:
                    for c in later:
                        # count each (t before c) student pair once
                        if (t, c) not in seen_before:
                            self.after_counts[t][c] += 1
                            seen_before.add((t, c))
        self.has_counts = dict(self.has_counts)

    def prob_after(self, earlier: str, later: str) -> float:
        num = self.after_counts.get(earlier, {}).get(later, 0) + 1
        den = self.has_counts.get(earlier, 0) + self.n_vocab
        return num / den

    def score(self, history: EnrollmentHistory) -> dict[str, float]:
        """Scores for every vocabulary course given the history (no filtering)."""
        taken = history.all_courses()
        return {c: sum(self.prob_after(t, c) for t in taken)
                for c in self.vocabulary}
