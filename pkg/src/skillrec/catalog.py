"""Course catalog and enrollment histories: loading, validation, persistence,
and synthetic corpus generation with planted enrollment rules."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

RECOMMENDABLE_MIN_WORDS = 7


class CatalogError(ValueError):
    """Structured load/validation failure.

    Carries the offending line number (1-based) when the failure is tied to a
    specific input row, so callers can report machine-parsable errors.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def description_word_count(description: str) -> int:
    """Whitespace-delimited word count; punctuation stays attached to words."""
    return len(description.split())


@dataclass
class Course:
    id: str
    title: str
    department: str
    description: str
    skills: list = field(default_factory=list)

    def __post_init__(self):
        if not self.id:
            raise CatalogError("course id must be nonempty")
        if not self.department:
            raise CatalogError(f"course {self.id!r}: department must be nonempty")

    @property
    def recommendable(self) -> bool:
        """Courses with too-short descriptions are excluded from recommendation."""
        return description_word_count(self.description) >= RECOMMENDABLE_MIN_WORDS

    def skill_texts(self) -> list[str]:
        return [s.text for s in self.skills]


@dataclass
class EnrollmentHistory:
    student_id: str
    semesters: list[set[str]]
    major: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.student_id:
            raise CatalogError("student_id must be nonempty")
        if len(self.semesters) < 1:
            raise CatalogError(f"student {self.student_id!r}: needs at least one semester")
        for i, sem in enumerate(self.semesters):
            if not sem:
                raise CatalogError(f"student {self.student_id!r}: semester {i} is empty")
        self.semesters = [set(s) for s in self.semesters]

    def all_courses(self) -> set[str]:
        out: set[str] = set()
        for sem in self.semesters:
            out |= sem
        return out


class Catalog:
    """Immutable-after-load collection of courses keyed by id."""

    def __init__(self, courses: list[Course]):
        self._by_id: dict[str, Course] = {}
        for c in courses:
            if c.id in self._by_id:
                raise CatalogError(f"duplicate course id {c.id!r}")
            self._by_id[c.id] = c

    def __len__(self) -> int:
        return len(self._by_id)

    def __contains__(self, course_id: str) -> bool:
        return course_id in self._by_id

    def __iter__(self):
        return iter(self._by_id.values())

    def get(self, course_id: str) -> Course:
        if course_id not in self._by_id:
            raise CatalogError(f"unknown course id {course_id!r}")
        return self._by_id[course_id]

    def ids(self) -> list[str]:
        return list(self._by_id.keys())

    def recommendable_courses(self) -> list[Course]:
        return [c for c in self._by_id.values() if c.recommendable]


def _course_from_record(rec: dict, line: int) -> Course:
    for key in ("id", "title", "department", "description"):
        if key not in rec:
            raise CatalogError(f"missing field {key!r}", line)
    try:
        return Course(
            id=str(rec["id"]),
            title=str(rec["title"]),
            department=str(rec["department"]),
            description=str(rec["description"]),
        )
    except CatalogError as e:
        raise CatalogError(str(e), line) from e


def load_catalog(path: str | Path, format: str = "json-lines") -> Catalog:
    """Load a catalog from JSON-lines (default) or CSV with the same columns."""
    path = Path(path)
    if not path.exists():
        raise CatalogError(f"no such file: {path}")
    courses: list[Course] = []
    seen: set[str] = set()
    if format == "json-lines":
        with path.open(encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                if not raw.strip():
                    continue
                try:
                    rec = json.loads(raw)
                except json.JSONDecodeError as e:
                    raise CatalogError(f"invalid JSON ({e.msg})", lineno) from e
                course = _course_from_record(rec, lineno)
                if course.id in seen:
                    raise CatalogError(f"duplicate course id {course.id!r}", lineno)
                seen.add(course.id)
                courses.append(course)
    elif format == "csv":
        with path.open(encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            for lineno, rec in enumerate(reader, start=2):
                course = _course_from_record(rec, lineno)
                if course.id in seen:
                    raise CatalogError(f"duplicate course id {course.id!r}", lineno)
                seen.add(course.id)
                courses.append(course)
    else:
        raise CatalogError(f"unknown catalog format {format!r}")
    return Catalog(courses)


def save_catalog(catalog: Catalog, path: str | Path) -> None:
    """Write JSON-lines with a fixed key order so identical catalogs are byte-identical."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for c in catalog:
            rec = {"id": c.id, "title": c.title, "department": c.department,
                   "description": c.description}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def load_enrollments(path: str | Path, catalog: Catalog) -> list[EnrollmentHistory]:
    """Load enrollment histories; every course id must resolve in the catalog."""
    path = Path(path)
    if not path.exists():
        raise CatalogError(f"no such file: {path}")
    histories: list[EnrollmentHistory] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as e:
                raise CatalogError(f"invalid JSON ({e.msg})", lineno) from e
            for key in ("student_id", "semesters"):
                if key not in rec:
                    raise CatalogError(f"missing field {key!r}", lineno)
            student_id = str(rec["student_id"])
            semesters = [set(map(str, sem)) for sem in rec["semesters"]]
            for sem in semesters:
                for cid in sem:
                    if cid not in catalog:
                        raise CatalogError(
                            f"student {student_id!r} references unknown course id {cid!r}",
                            lineno)
            try:
                hist = EnrollmentHistory(
                    student_id=student_id,
                    semesters=semesters,
                    major=[str(m) for m in rec.get("major", [])],
                )
            except CatalogError as e:
                raise CatalogError(str(e), lineno) from e
            histories.append(hist)
    return histories


def save_enrollments(histories: list[EnrollmentHistory], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for h in histories:
            rec = {
                "student_id": h.student_id,
                "major": list(h.major),
                "semesters": [sorted(sem) for sem in h.semesters],
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# Synthetic corpus generation
# ---------------------------------------------------------------------------

@dataclass
class SyntheticSpec:
    n_departments: int
    n_courses: int
    n_students: int
    n_semesters: int
    planted_rules: list[tuple[set[str], str]] = field(default_factory=list)
    seed: int = 0
    n_rules: int = 0  # convenience: auto-plant this many rules when planted_rules empty

    def __post_init__(self):
        if min(self.n_departments, self.n_courses, self.n_semesters) <= 0:
            raise CatalogError("department/course/semester counts must be positive")
        if self.n_students < 0:
            raise CatalogError("n_students must be >= 0")


# Skill-phrase vocabulary used to compose descriptions. Each department draws
# from a contiguous slice, so departments have a coherent skill theme and the
# tagger has recoverable gold spans.
SKILL_VOCAB = [
    "data structures", "sorting methods", "dynamic memory allocation", "recursion",
    "graph algorithms", "hash tables", "binary trees", "computational complexity",
    "linear algebra", "matrix factorization", "eigenvalue problems", "numerical integration",
    "probability theory", "hypothesis testing", "regression analysis", "bayesian inference",
    "organic chemistry", "reaction kinetics", "molecular bonding", "titration methods",
    "cell biology", "gene expression", "protein folding", "enzyme catalysis",
    "microeconomics", "market equilibrium", "game theory", "supply curves",
    "thermodynamics", "fluid dynamics", "quantum mechanics", "wave propagation",
    "literary criticism", "narrative structure", "poetic meter", "rhetorical analysis",
    "cognitive psychology", "memory consolidation", "perception studies", "behavioral experiments",
    "machine learning", "neural networks", "feature engineering", "gradient descent",
    "circuit design", "signal processing", "control systems", "embedded programming",
]

_FILLER_OPENINGS = [
    "This course emphasizes the study of",
    "An introduction to the principles of",
    "Students explore fundamental topics in",
    "A rigorous treatment of",
    "Survey of core ideas including",
    "Practical laboratory work covering",
]

_SHORT_DESCRIPTIONS = [
    "Independent study.",
    "Directed group research.",
    "Supervised reading.",
    "Honors thesis.",
]


def _compose_description(rng: np.random.Generator, phrases: list[str]) -> str:
    opening = _FILLER_OPENINGS[rng.integers(len(_FILLER_OPENINGS))]
    head = ", ".join(phrases[:-1]) + f", and {phrases[-1]}" if len(phrases) > 1 else phrases[0]
    tail = f"Weekly problem sets reinforce {phrases[0]} through applied exercises."
    return f"{opening} {head}. {tail}"


def synth_generate(spec: SyntheticSpec) -> tuple[Catalog, list[EnrollmentHistory]]:
    catalog, histories, _ = synth_generate_with_rules(spec)
    return catalog, histories


def synth_generate_with_rules(
        spec: SyntheticSpec) -> tuple[Catalog, list[EnrollmentHistory], list]:
    """Generate a deterministic catalog + enrollment corpus from a spec.

    Structure the model can learn: every student has a home department and
    departments order their courses into per-semester levels, so most of a
    semester's picks come from a small (department, semester) pool. Planted
    rules ({antecedents} -> consequent) overlay that: a participant takes the
    antecedent courses in early semesters and, with high probability, the
    consequent in the final one, so each rule holds for well over 30% of the
    students whose histories contain the antecedents. Also returns the rules
    actually planted (relevant when the spec asked for auto-planting via
    n_rules).
    """
    rng = np.random.default_rng(spec.seed)
    dept_names = [f"DEPT{d:02d}" for d in range(spec.n_departments)]

    courses: list[Course] = []
    for i in range(spec.n_courses):
        dept_idx = i % spec.n_departments
        cid = f"C{i:04d}"
        # Theme: departments cycle through contiguous slices of the vocabulary.
        base = (dept_idx * 4) % len(SKILL_VOCAB)
        pool = [SKILL_VOCAB[(base + j) % len(SKILL_VOCAB)] for j in range(8)]
        k = int(rng.integers(4, 7))
        phrases = list(rng.choice(pool, size=k, replace=False))
        if rng.random() < 0.05 and i >= spec.n_departments:
            # A few non-recommendable stubs (still loadable, never recommended).
            description = _SHORT_DESCRIPTIONS[rng.integers(len(_SHORT_DESCRIPTIONS))]
        else:
            description = _compose_description(rng, phrases)
        courses.append(Course(
            id=cid,
            title=f"{dept_names[dept_idx]} {100 + i}: {phrases[0].title()}",
            department=dept_names[dept_idx],
            description=description,
        ))
    catalog = Catalog(courses)

    rules = list(spec.planted_rules)
    if not rules and spec.n_rules:
        rules = _auto_rules(spec, catalog, rng)
    for ante, cons in rules:
        for cid in set(ante) | {cons}:
            if cid not in catalog:
                raise CatalogError(f"planted rule references unknown course id {cid!r}")
    if rules and len(rules) * 3 > spec.n_courses:
        raise CatalogError("planted rules exceed course capacity")

    by_dept: dict[str, list[str]] = {d: [] for d in dept_names}
    for c in courses:
        by_dept[c.department].append(c.id)
    # Departments sequence their offerings: course w within a department sits
    # at level w % n_semesters, and semester t draws mostly from level t.
    by_dept_level: dict[str, list[list[str]]] = {
        d: [[] for _ in range(spec.n_semesters)] for d in dept_names}
    for d, ids in by_dept.items():
        for w, cid in enumerate(ids):
            by_dept_level[d][w % spec.n_semesters].append(cid)

    histories: list[EnrollmentHistory] = []
    for s in range(spec.n_students):
        sid = f"S{s:04d}"
        home_dept = dept_names[int(rng.integers(spec.n_departments))]
        major = [home_dept] if rng.random() > 0.25 else []  # some undeclared
        rule = rules[s % len(rules)] if rules and rng.random() < 0.5 else None

        semesters: list[set[str]] = []
        taken: set[str] = set()
        for t in range(spec.n_semesters):
            size = int(rng.integers(2, 4))
            sem: set[str] = set()
            while len(sem) < size:
                draw = rng.random()
                level_avail = [c for c in by_dept_level[home_dept][t]
                               if c not in taken and c not in sem]
                # Fallback stays at or below the current level: advanced
                # offerings wait for their semester.
                dept_avail = [c for lv in range(t + 1)
                              for c in by_dept_level[home_dept][lv]
                              if c not in taken and c not in sem]
                if draw < 0.80 and level_avail:
                    cand = level_avail[int(rng.integers(len(level_avail)))]
                elif draw < 0.95 and dept_avail:
                    cand = dept_avail[int(rng.integers(len(dept_avail)))]
                else:
                    cand = courses[int(rng.integers(spec.n_courses))].id
                if cand not in taken and cand not in sem:
                    sem.add(cand)
            semesters.append(sem)
            taken |= sem

        if rule is not None and spec.n_semesters >= 2:
            ante, cons = rule
            ante = sorted(ante)
            # Clear rule courses from the random draw, then place antecedents
            # in early semesters and the consequent (p=0.8) in the final one.
            for sem in semesters:
                for cid in ante + [cons]:
                    sem.discard(cid)
            slots = spec.n_semesters - 1
            for j, cid in enumerate(ante):
                semesters[j % slots].add(cid)
            if rng.random() < 0.8:
                semesters[-1].add(cons)
            everything = set().union(*semesters)
            for sem in semesters:
                while not sem:
                    cand = courses[int(rng.integers(spec.n_courses))].id
                    if cand not in everything:
                        sem.add(cand)
                        everything.add(cand)
        histories.append(EnrollmentHistory(student_id=sid, semesters=semesters, major=major))

    return catalog, histories, rules


def _auto_rules(spec: SyntheticSpec, catalog: Catalog,
                rng: np.random.Generator) -> list[tuple[set[str], str]]:
    ids = catalog.ids()
    if spec.n_rules * 3 > len(ids):
        raise CatalogError("planted rules exceed course capacity")
    picked = rng.choice(len(ids), size=spec.n_rules * 3, replace=False)
    rules = []
    for r in range(spec.n_rules):
        a, b, c = (ids[int(picked[3 * r + j])] for j in range(3))
        rules.append(({a, b}, c))
    return rules


def gold_spans_for_course(course: Course, vocabulary: list[str] | None = None):
    """Token-index gold spans of vocabulary phrases inside a course description.

    Used by synth consumers to emit training data for the tagger; matching is
    whitespace/punctuation tokenization identical to the tagger's cased mode.
    """
    from .tagger.tokenize import tokenize

    vocab = vocabulary if vocabulary is not None else SKILL_VOCAB
    text = tokenize(course.description, casing_mode="uncased")
    spans = []
    phrase_tokens = {p: p.split() for p in vocab}
    n = len(text.tokens)
    i = 0
    while i < n:
        best = None
        for phrase, ptoks in phrase_tokens.items():
            m = len(ptoks)
            if i + m <= n and text.tokens[i:i + m] == ptoks:
                if best is None or m > best[1]:
                    best = (phrase, m)
        if best is not None:
            spans.append((i, i + best[1]))
            i += best[1]
        else:
            i += 1
    return spans
