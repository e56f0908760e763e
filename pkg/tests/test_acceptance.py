"""Acceptance gate: every criterion runs at its stated tolerance and prints
one [ACCEPTANCE] pass/fail line. Run with `pytest tests/test_acceptance.py -v -s`.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from skillrec.catalog import (
    Catalog, Course, EnrollmentHistory, SKILL_VOCAB, SyntheticSpec,
    synth_generate,
)
from skillrec.cli import main as cli_main
from skillrec.config import Config
from skillrec.embeddings import HashedNgramStore, cosine
from skillrec.evaluation import (
    cohen_kappa, proportional_agreement, random_scorer, recall_at_k, span_prf,
)
from skillrec.explainer import MATCH_THRESHOLD, match_skills, partition_skills
from skillrec.recommender import (
    CooccurrenceBaseline, ModelScorer, ScoredCourse, Vocab, diversify,
    init_params, loss_and_grads, mask_sampling, score_candidates, train,
)
from skillrec.recommender.masking import SequenceExample
from skillrec.recommender.model import corpus_loss
from skillrec.recommender.ranking import scored_from_dict
from skillrec.service import EngineState, FeedbackLog, create_app
from skillrec.tagger import (
    B_CON, I_CON, O, FeatureProvider, Tagger, TransitionMatrix,
    crf_log_likelihood, extract_skills, postprocess_skills, viterbi_decode,
)
from skillrec.tagger.crf import crf_gradients
from skillrec.tagger.spans import DEFAULT_STOPLIST, SkillSpan


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL")
        raise
    print(f"[ACCEPTANCE] {name}: PASS")


# Seed-fixed experiment corpus: 12 departments, 120 courses, 300 students,
# 4 semesters, 6 planted rules.
EXPERIMENT_SPEC = SyntheticSpec(n_departments=12, n_courses=120, n_students=300,
                                n_semesters=4, n_rules=6, seed=2024)


@pytest.fixture(scope="module")
def experiment():
    catalog, histories = synth_generate(EXPERIMENT_SPEC)
    tagger = Tagger.from_lexicon(SKILL_VOCAB)
    for course in catalog:
        if course.description.strip():
            extract_skills(course, [tagger])
    majors = sorted({m for h in histories for m in h.major})
    vocab = Vocab(sorted(catalog.ids()), majors)
    params = init_params(vocab, d_model=32, n_positions=8, seed=0)
    params, _ = train(params, histories, lr=0.2, seed=0,
                      pretrain_epochs=10, finetune_epochs=60)
    store = HashedNgramStore(dim=64)
    return catalog, histories, params, store


# --- 1. Viterbi oracle -------------------------------------------------------

def test_viterbi_exhaustive_oracle_200_instances():
    with criterion("viterbi oracle (200 random instances, n<=6)"):
        rng = np.random.default_rng(101)
        start = time.perf_counter()
        failures = 0
        for _ in range(200):
            n = int(rng.integers(1, 7))
            em = rng.normal(0, 2.0, size=(n, 3))
            tr = TransitionMatrix(rng.normal(0, 1.5, (3, 3)),
                                  rng.normal(0, 1.0, 3), rng.normal(0, 1.0, 3))
            got = viterbi_decode(em, tr)
            best, best_score = None, -math.inf
            for path in itertools.product(range(3), repeat=n):
                s = tr.start[path[0]] + em[0][path[0]]
                for t in range(1, n):
                    s += tr.scores[path[t - 1]][path[t]] + em[t][path[t]]
                s += tr.stop[path[-1]]
                if s > best_score:
                    best_score, best = s, list(path)
            if got != best:
                failures += 1
        elapsed = time.perf_counter() - start
        assert failures == 0
        assert elapsed < 5.0, f"runtime {elapsed:.2f}s over budget"


# --- 2. CRF normalization -----------------------------------------------------

def test_crf_probabilities_normalize_50_instances():
    with criterion("CRF normalization (sum of path probs = 1 +- 1e-9)"):
        rng = np.random.default_rng(202)
        for _ in range(50):
            n = int(rng.integers(1, 6))
            em = rng.normal(0, 2.0, size=(n, 3))
            tr = TransitionMatrix(rng.normal(0, 1.5, (3, 3)),
                                  rng.normal(0, 1.0, 3), rng.normal(0, 1.0, 3))
            total = 0.0
            for path in itertools.product(range(3), repeat=n):
                if any(a == O and b == I_CON for a, b in zip(path, path[1:])):
                    continue
                total += math.exp(crf_log_likelihood(em, tr, list(path)))
            assert abs(total - 1.0) <= 1e-9, total


# --- 3. Gradient checks ---------------------------------------------------------

def _rel(a, b):
    if max(abs(a), abs(b)) < 1e-7:
        return 0.0
    return abs(a - b) / max(1e-8, abs(a) + abs(b))


def test_crf_transition_gradient_check():
    with criterion("CRF transition gradients vs central differences (1e-5)"):
        rng = np.random.default_rng(303)
        h = 1e-5
        failures = 0
        for _ in range(5):
            n = int(rng.integers(2, 6))
            em = rng.normal(0, 2.0, size=(n, 3))
            tr = TransitionMatrix(rng.normal(0, 1.0, (3, 3)),
                                  rng.normal(0, 1.0, 3), rng.normal(0, 1.0, 3))
            gold = [O] * n
            for i in range(1, n):
                gold[i] = int(rng.integers(3))
                if gold[i - 1] == O and gold[i] == I_CON:
                    gold[i] = B_CON
            _, d_trans, d_start, d_stop, _ = crf_gradients(em, tr, gold)
            for i in range(3):
                for j in range(3):
                    t2 = tr.copy()
                    t2.scores[i, j] = tr.scores[i, j] + h
                    up = -crf_log_likelihood(em, t2, gold)
                    t2.scores[i, j] = tr.scores[i, j] - h
                    down = -crf_log_likelihood(em, t2, gold)
                    if _rel(d_trans[i, j], (up - down) / (2 * h)) >= 1e-5:
                        failures += 1
                for vec, grad in ((tr.start, d_start), (tr.stop, d_stop)):
                    t2 = tr.copy()
                    ref = t2.start if vec is tr.start else t2.stop
                    ref[i] = vec[i] + h
                    up = -crf_log_likelihood(em, t2, gold)
                    ref[i] = vec[i] - h
                    down = -crf_log_likelihood(em, t2, gold)
                    if _rel(grad[i], (up - down) / (2 * h)) >= 1e-5:
                        failures += 1
        assert failures == 0


def test_recommender_gradient_check_all_groups():
    with criterion("recommender parameter-group gradients vs central "
                   "differences (1e-4)"):
        vocab = Vocab([f"C{i}" for i in range(12)], ["CS"])
        rng = np.random.default_rng(404)
        failures = 0
        for tied in (False, True):
            params = init_params(vocab, d_model=8, n_positions=6, seed=1,
                                 tied_output=tied)
            for w in params.weights.values():
                w += rng.normal(0, 0.4, w.shape)
            ex = SequenceExample(items=[f"C{int(rng.integers(12))}" for _ in range(6)],
                                 positions=[0, 0, 1, 1, 2, 2], majors=["CS"])
            batches = [mask_sampling(ex, 0.4, seed=7)]
            _, grads = loss_and_grads(params, batches)
            h = 1e-5
            for name, w in params.weights.items():
                flat = w.reshape(-1)
                for idx in rng.choice(flat.size, size=min(10, flat.size),
                                      replace=False):
                    orig = flat[idx]
                    flat[idx] = orig + h
                    up = corpus_loss(params, batches)
                    flat[idx] = orig - h
                    down = corpus_loss(params, batches)
                    flat[idx] = orig
                    fd = (up - down) / (2 * h)
                    got = grads[name].reshape(-1)[idx]
                    if max(abs(fd), abs(got)) < 1e-7:
                        continue
                    if abs(fd - got) / max(1e-8, abs(fd) + abs(got)) >= 1e-4:
                        failures += 1
        assert failures == 0


# --- 4. Explanation equations -----------------------------------------------------

def test_partition_equals_bruteforce_oracle_100_pairs(experiment):
    with criterion("explanation partition == brute-force oracle (100 pairs)"):
        catalog, histories, _, store = experiment
        rng = np.random.default_rng(505)
        candidates = [c for c in catalog.recommendable_courses() if c.skills]
        for _ in range(100):
            hist = histories[int(rng.integers(len(histories)))]
            target = candidates[int(rng.integers(len(candidates)))]
            learned, new = partition_skills(target, hist, catalog, store)

            target_sk = set(target.skill_texts())
            taken_union: set[str] = set()
            for cid in hist.all_courses():
                taken_union |= set(catalog.get(cid).skill_texts())
            want_learned = set()
            for t in target_sk:
                for k in taken_union:
                    if t == k or cosine(store.embed(t),
                                        store.embed(k)) > MATCH_THRESHOLD:
                        want_learned.add(t)
                        break
            assert learned == want_learned
            assert new == target_sk - want_learned
            assert learned | new == target_sk
            assert learned & new == set()


# --- 5. Constants conformance -------------------------------------------------------

def test_match_threshold_is_strict_085():
    with criterion("match threshold strict > 0.85"):
        assert MATCH_THRESHOLD == 0.85
        v = np.array([1.0, 0.0])
        store_vectors = {"a": v, "b": np.array([0.85, math.sqrt(1 - 0.7225)])}

        class S:
            def embed(self, text):
                return store_vectors[text]

        sim = cosine(store_vectors["a"], store_vectors["b"])
        assert match_skills({"a"}, {"b"}, S(), threshold=sim) == []
        assert match_skills({"a"}, {"b"}, S(), threshold=sim - 1e-9) != []


def test_explanations_capped_at_seven(experiment):
    with criterion("explanation lists <= 7 per side"):
        from skillrec.explainer import build_explanation

        catalog, histories, _, store = experiment
        rng = np.random.default_rng(606)
        candidates = [c for c in catalog.recommendable_courses() if c.skills]
        for _ in range(30):
            hist = histories[int(rng.integers(len(histories)))]
            target = candidates[int(rng.integers(len(candidates)))]
            exp = build_explanation(target, hist, catalog, store)
            assert len(exp.learned) <= 7
            assert len(exp.new) <= 7
        # a 10-skill course cuts to exactly the 7 highest-relevance new skills
        texts = [f"skill number {i}" for i in range(10)]
        course = Course("CAP", "cap", "D", "a description with enough words here")
        course.skills = [SkillSpan(t, i, i + 1) for i, t in enumerate(texts)]
        cap_cat = Catalog([course, Course("H", "h", "D", "w x y z a b c")])
        exp = build_explanation(course, EnrollmentHistory("s", [{"H"}]),
                                cap_cat, store)
        assert len(exp.new) == 7


def test_recommendations_are_five_distinct_departments(experiment):
    with criterion("top 5 courses from 5 distinct departments"):
        catalog, histories, params, store = experiment
        for hist in histories[:25]:
            recs = diversify(score_candidates(params, hist, catalog), k=5)
            assert len(recs) == 5
            depts = [e.department for e in recs.entries]
            assert len(set(depts)) == 5


def test_short_description_courses_never_recommended(experiment):
    with criterion("<7-word courses never recommended"):
        catalog, histories, params, _ = experiment
        short_ids = {c.id for c in catalog if not c.recommendable}
        assert short_ids, "corpus should include non-recommendable courses"
        for hist in histories[:40]:
            scored = score_candidates(params, hist, catalog)
            assert not ({s.course_id for s in scored} & short_ids)


def test_generic_and_long_skills_never_survive(experiment):
    with criterion("generic/over-5-word skills never appear"):
        catalog, _, _, _ = experiment
        stop = {s.lower() for s in DEFAULT_STOPLIST}
        for course in catalog:
            for skill in course.skills:
                assert skill.text.lower() not in stop
                assert len(skill.text.split()) <= 5
        spans = [SkillSpan("homework", 0, 1),
                 SkillSpan("one two three four five six", 1, 7),
                 SkillSpan("fine skill", 8, 10)]
        out = postprocess_skills(spans)
        assert [s.text for s in out] == ["fine skill"]


# --- 6. Diversification oracle --------------------------------------------------------

def test_diversify_equals_oracle_100_lists():
    with criterion("greedy diversify == per-department-best oracle (100 lists)"):
        rng = np.random.default_rng(707)
        for _ in range(100):
            n = int(rng.integers(1, 40))
            scored = [ScoredCourse(f"c{i}", float(rng.random()),
                                   f"D{int(rng.integers(1, 9))}")
                      for i in range(n)]
            scored.sort(key=lambda s: -s.score)
            got = diversify(scored, k=5).course_ids()
            best = {}
            for cand in scored:
                if cand.department not in best or \
                        cand.score > best[cand.department].score:
                    best[cand.department] = cand
            want = [s.course_id for s in
                    sorted(best.values(), key=lambda s: -s.score)[:5]]
            assert got == want


# --- 7. Planted-rule experiment ---------------------------------------------------------

def test_planted_rule_experiment(experiment):
    with criterion("planted-rule experiment: model recall@5 beats random CI "
                   "and stays within 0.02 of co-occurrence"):
        start = time.perf_counter()
        catalog, histories, params, _ = experiment
        eval_h = histories[240:]

        model_recall = recall_at_k(ModelScorer(params, catalog), eval_h,
                                   catalog, k=5)
        baseline = CooccurrenceBaseline(histories, sorted(catalog.ids()))
        base_recall = recall_at_k(
            lambda h: scored_from_dict(baseline.score(h), h, catalog),
            eval_h, catalog, k=5)

        rand_vals = np.array([
            recall_at_k(random_scorer(catalog, seed=9000 + s), eval_h,
                        catalog, k=5)
            for s in range(200)
        ])
        ci_upper = float(np.quantile(rand_vals, 0.995))
        elapsed = time.perf_counter() - start

        print(f"\n  model={model_recall:.4f} cooccurrence={base_recall:.4f} "
              f"random_CI_upper={ci_upper:.4f} ({elapsed:.0f}s)")
        assert model_recall > ci_upper
        assert model_recall >= base_recall - 0.02
        assert elapsed < 600.0


# --- 8. Metrics arithmetic ---------------------------------------------------------------

def test_metrics_reproduce_hand_computed_fixtures():
    with criterion("metrics arithmetic (span_prf, kappa, agreement fixtures)"):
        rep = span_prf({"c": {("a", 1), ("b", 2)}}, {"c": {("b", 2), ("x", 3)}})
        assert (rep.precision, rep.recall, rep.f1) == (0.5, 0.5, 0.5)
        gold = {"c1": {(0, 2)}, "c2": {(3, 5)}}
        rep = span_prf(gold, gold)
        assert (rep.precision, rep.recall, rep.f1) == (1.0, 1.0, 1.0)
        assert cohen_kappa([1, 0, 1, 0], [1, 0, 1, 0]) == 1.0
        assert cohen_kappa([1, 1, 0, 0], [1, 0, 1, 0]) == pytest.approx(0.0)
        assert proportional_agreement([1, 1, 0, 0, 1, 0, 1, 1],
                                      [1, 1, 0, 1, 0, 0, 1, 1]) == 0.75
        assert proportional_agreement([1, 0], [1, 0]) == 1.0


# --- 9. Determinism ------------------------------------------------------------------------

def test_cli_outputs_byte_identical_under_seed(tmp_path):
    with criterion("determinism: synth/train-tagger/train-model/recommend "
                   "byte-identical under identical seeds"):
        runner = CliRunner()
        outs: dict[str, list[bytes]] = {"catalog": [], "tagger": [], "model": [],
                                        "recommend": []}
        for run in ("r1", "r2"):
            d = tmp_path / run
            res = runner.invoke(cli_main, [
                "synth", "--out-dir", str(d), "--departments", "6",
                "--courses", "30", "--students", "30", "--semesters", "3",
                "--rules", "1", "--seed", "13"])
            assert res.exit_code == 0, res.output
            outs["catalog"].append((d / "catalog.jsonl").read_bytes()
                                   + (d / "enrollments.jsonl").read_bytes())
            res = runner.invoke(cli_main, [
                "train-tagger", "--catalog", str(d / "catalog.jsonl"),
                "--gold", str(d / "gold.jsonl"), "--epochs", "3",
                "--seed", "13", "--out", str(d / "tagger.json")])
            assert res.exit_code == 0, res.output
            outs["tagger"].append((d / "tagger.json").read_bytes())
            res = runner.invoke(cli_main, [
                "train-model", "--catalog", str(d / "catalog.jsonl"),
                "--enrollments", str(d / "enrollments.jsonl"),
                "--epochs", "2", "--d-model", "8", "--seed", "13",
                "--out", str(d / "model.json")])
            assert res.exit_code == 0, res.output
            outs["model"].append((d / "model.json").read_bytes())
            res = runner.invoke(cli_main, [
                "recommend", "--catalog", str(d / "catalog.jsonl"),
                "--enrollments", str(d / "enrollments.jsonl"),
                "--model", str(d / "model.json"), "--student", "S0000",
                "--seed", "13", "--dim", "32", "--out", str(d / "rec.json")])
            assert res.exit_code == 0, res.output
            outs["recommend"].append((d / "rec.json").read_bytes())
        for name, pair in outs.items():
            assert pair[0] == pair[1], f"{name} outputs differ between runs"


# --- 10. Service contract -----------------------------------------------------------------

def test_service_contract(experiment, tmp_path):
    with criterion("service contract: diversification, condition-dependent "
                   "explanations, lossless feedback"):
        catalog, histories, params, store = experiment
        engine = EngineState(
            catalog=catalog,
            histories={h.student_id: h for h in histories},
            model=params,
            store=store,
            config=Config(),
            feedback_path=tmp_path / "feedback.jsonl",
        )
        client = TestClient(create_app(engine))

        for sid in [h.student_id for h in histories[:10]]:
            for condition in ("exp", "no-exp"):
                body = client.get(f"/api/students/{sid}/recommendations",
                                  params={"condition": condition,
                                          "seed": 7}).json()
                entries = body["entries"]
                assert len(entries) <= 5
                depts = [e["department"] for e in entries]
                assert len(set(depts)) == len(depts)
                for entry in entries:
                    assert ("explanation" in entry) == (condition == "exp")
                    if condition == "exp":
                        assert len(entry["explanation"]["learned"]) <= 7
                        assert len(entry["explanation"]["new"]) <= 7

        feedback = {"participant_id": "px", "course_id": "C0001",
                    "condition": "exp", "q1": 5, "q2": 1, "q3": 3, "q4": 2,
                    "q5": 4, "major_declared": False}
        assert client.post("/api/feedback", json=feedback).status_code == 200
        log = FeedbackLog(tmp_path / "feedback.jsonl")
        stored = {(r.participant_id, r.course_id): r.to_dict()
                  for r in log.all_responses()}
        assert stored[("px", "C0001")] == feedback
