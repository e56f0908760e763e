from __future__ import annotations

import numpy as np
import pytest

from skillrec.catalog import Catalog, Course, EnrollmentHistory, SyntheticSpec, \
    synth_generate


@pytest.fixture(scope="session")
def small_corpus():
    """Desk-size corpus with two planted rules, shared across test modules."""
    spec = SyntheticSpec(n_departments=6, n_courses=48, n_students=120,
                         n_semesters=4, n_rules=2, seed=7)
    return synth_generate(spec)


@pytest.fixture
def tiny_catalog():
    return Catalog([
        Course("A1", "Algorithms", "CS",
               "This course covers data structures, recursion, and sorting methods in depth."),
        Course("B1", "Linear Algebra", "MATH",
               "Matrix factorization, eigenvalue problems, and linear algebra foundations for science."),
        Course("C1", "Poetry", "ENGL",
               "Poetic meter and narrative structure studied through close reading of modern poems."),
        Course("D1", "Indep Study", "CS", "Independent study."),
    ])


@pytest.fixture
def history_two_semesters():
    return EnrollmentHistory("S1", [{"A1"}, {"B1", "C1"}], major=["CS"])


def orthogonal_store(dim: int = 8):
    """Embedding store stub: every distinct text gets its own axis vector."""

    class Store:
        def __init__(self):
            self._index: dict[str, int] = {}

        def embed(self, text: str) -> np.ndarray:
            text = text.strip()
            if not text:
                raise ValueError("empty text")
            if text not in self._index:
                self._index[text] = len(self._index)
            vec = np.zeros(max(dim, len(self._index)))
            vec[self._index[text]] = 1.0
            return vec

    return Store()


class FixedStore:
    """Embedding store with explicitly assigned vectors, for exact cosines."""

    def __init__(self, vectors: dict[str, np.ndarray]):
        self.vectors = {k: np.asarray(v, dtype=float) for k, v in vectors.items()}

    def embed(self, text: str) -> np.ndarray:
        text = text.strip()
        if text not in self.vectors:
            raise KeyError(f"unknown key {text!r}")
        return self.vectors[text]
