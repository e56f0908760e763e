#!/usr/bin/env python3
"""Exercise the HTTP service end to end, in process, via the test client:
recommendations under both study conditions, a what-if loop, and survey
feedback persistence.

Run: python demos/04_service_walkthrough.py
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from skillrec.catalog import SKILL_VOCAB, SyntheticSpec, synth_generate
from skillrec.config import Config
from skillrec.embeddings import HashedNgramStore
from skillrec.recommender import Vocab, init_params, train
from skillrec.service import EngineState, FeedbackLog, create_app
from skillrec.tagger import Tagger, extract_skills

print("building engine (synth corpus + trained model)...")
spec = SyntheticSpec(n_departments=6, n_courses=48, n_students=60,
                     n_semesters=4, n_rules=2, seed=8)
catalog, histories = synth_generate(spec)
tagger = Tagger.from_lexicon(SKILL_VOCAB)
for course in catalog:
    extract_skills(course, [tagger])
majors = sorted({m for h in histories for m in h.major})
vocab = Vocab(sorted(catalog.ids()), majors)
params = init_params(vocab, d_model=16, n_positions=10, seed=0)
params, _ = train(params, histories, lr=0.3, seed=0,
                  pretrain_epochs=4, finetune_epochs=12)

workdir = Path(tempfile.mkdtemp(prefix="skillrec-demo-"))
engine = EngineState(
    catalog=catalog,
    histories={h.student_id: h for h in histories},
    model=params,
    store=HashedNgramStore(dim=64),
    config=Config(),
    feedback_path=workdir / "feedback.jsonl",
)
client = TestClient(create_app(engine))
student = histories[0].student_id

print()
print("GET /api/health ->", client.get("/api/health").json())

print()
print(f"GET /api/students/{student}/recommendations?condition=no-exp&seed=7")
body = client.get(f"/api/students/{student}/recommendations",
                  params={"condition": "no-exp", "seed": 7}).json()
for e in body["entries"]:
    print(f"  #{e['score_rank']} {e['course_id']} [{e['department']}] {e['title']}")
print("  (no explanation field under the no-exp condition:",
      "explanation" not in body["entries"][0], ")")

print()
print(f"GET /api/students/{student}/recommendations?condition=exp&seed=7")
body = client.get(f"/api/students/{student}/recommendations",
                  params={"condition": "exp", "seed": 7}).json()
entry = body["entries"][0]
print(f"  first card: {entry['course_id']} {entry['title']}")
print("  learned:", [s["text"] for s in entry["explanation"]["learned"]][:5])
print("  new:    ", [s["text"] for s in entry["explanation"]["new"]][:5])

print()
print("POST /api/whatif with the first card added to a hypothetical semester")
what = client.post("/api/whatif", json={
    "student_id": student,
    "added_courses": [entry["course_id"]],
    "condition": "no-exp",
    "seed": 7,
}).json()
print("  new top-5:", [e["course_id"] for e in what["entries"]])
print("  added course no longer a candidate:",
      entry["course_id"] not in [e["course_id"] for e in what["entries"]])

print()
print("POST /api/feedback twice (second call upserts the same key)")
fb = {"participant_id": "demo", "course_id": entry["course_id"],
      "condition": "exp", "q1": 2, "q2": 5, "q3": 4, "q4": 4, "q5": 3,
      "major_declared": False}
client.post("/api/feedback", json=fb)
fb["q1"] = 4
client.post("/api/feedback", json=fb)
log = FeedbackLog(engine.feedback_path)
stored = log.all_responses()
print(f"  stored {len(stored)} record(s); final q1 =", stored[0].q1)
print(f"  survey file: {engine.feedback_path}")
print()
print("done. serve the same engine over a real port with:")
print("  skillrec serve --catalog ... --enrollments ... --model ... --port 8080")
