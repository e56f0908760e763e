"""HTTP service over a loaded engine: recommendations with optional
explanations, what-if rescoring, catalog lookup, and survey feedback."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from .catalog import Catalog, EnrollmentHistory
from .config import Config
from .evaluation import SurveyResponse
from .explainer import Explanation
from .recommender.model import ModelParams
from .recommender.ranking import RecommendationResult, recommend


@dataclass
class EngineState:
    """Everything a request needs, immutable after startup except feedback."""
    catalog: Catalog
    histories: dict[str, EnrollmentHistory]
    model: ModelParams
    store: object
    config: Config = field(default_factory=Config)
    feedback_path: Path | None = None

    def history_for(self, student_id: str) -> EnrollmentHistory | None:
        return self.histories.get(student_id)


class FeedbackLog:
    """Append-only JSON-lines store, upserting on (participant, course).

    Appends are serialized through a lock; the file is compacted (rewritten
    with only the latest record per key) every compact_every appends.
    """

    def __init__(self, path: Path, compact_every: int = 100):
        self.path = Path(path)
        self.compact_every = compact_every
        self._lock = threading.Lock()
        self._appends_since_compact = 0
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if not self.path.exists():
            self.path.touch()

    def upsert(self, response: SurveyResponse) -> None:
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(response.to_dict(), sort_keys=True) + "\n")
            self._appends_since_compact += 1
            if self._appends_since_compact >= self.compact_every:
                self._compact_locked()

    def _compact_locked(self) -> None:
        records = self._latest_records()
        tmp = self.path.with_suffix(".tmp")
        with tmp.open("w", encoding="utf-8") as fh:
            for rec in records.values():
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        tmp.replace(self.path)
        self._appends_since_compact = 0

    def _latest_records(self) -> dict[tuple[str, str], dict]:
        records: dict[tuple[str, str], dict] = {}
        with self.path.open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                records[(rec["participant_id"], rec["course_id"])] = rec
        return records

    def all_responses(self) -> list[SurveyResponse]:
        return [SurveyResponse.from_dict(rec)
                for rec in self._latest_records().values()]


def _entry_payload(engine: EngineState, result: RecommendationResult,
                   course_id: str, include_explanation: bool) -> dict:
    course = engine.catalog.get(course_id)
    score_rank = result.recommendations.course_ids().index(course_id) + 1
    entry = {
        "course_id": course.id,
        "title": course.title,
        "department": course.department,
        "description": course.description,
        "score": next(e.score for e in result.recommendations.entries
                      if e.course_id == course_id),
        "score_rank": score_rank,
    }
    if include_explanation:
        exp: Explanation = result.explanations[course_id]
        entry["explanation"] = {
            "learned": [{"text": s.text, "relevance": round(s.relevance, 6)}
                        for s in exp.learned],
            "new": [{"text": s.text, "relevance": round(s.relevance, 6)}
                    for s in exp.new],
        }
    return entry


def _recommendation_payload(engine: EngineState, result: RecommendationResult,
                            condition: str) -> dict:
    include_exp = condition == "exp"
    return {
        "student_id": result.student_id,
        "condition": condition,
        "seed": result.seed,
        "entries": [_entry_payload(engine, result, cid, include_exp)
                    for cid in result.presentation_order],
    }


def create_app(engine: EngineState | None = None,
               static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="skillrec")
    app.state.engine = engine

    def current_engine() -> EngineState:
        eng = app.state.engine
        if eng is None:
            raise HTTPException(status_code=503, detail="engine not ready")
        return eng

    def run_recommend(eng: EngineState, history: EnrollmentHistory,
                      student_id: str, seed: int) -> RecommendationResult:
        cfg = eng.config
        return recommend(student_id, history, eng.catalog, eng.model, eng.store,
                         seed=seed, k=cfg.k, n_skills=cfg.top_n_skills,
                         threshold=cfg.threshold)

    @app.get("/api/health")
    def health():
        return {"status": "ok", "ready": app.state.engine is not None}

    @app.get("/api/courses/{course_id}")
    def get_course(course_id: str):
        eng = current_engine()
        if course_id not in eng.catalog:
            raise HTTPException(status_code=404, detail=f"unknown course {course_id!r}")
        c = eng.catalog.get(course_id)
        return {"id": c.id, "title": c.title, "department": c.department,
                "description": c.description,
                "skills": [s.text for s in c.skills],
                "recommendable": c.recommendable}

    @app.get("/api/students/{student_id}/recommendations")
    def get_recommendations(student_id: str, condition: str = "no-exp", seed: int = 0):
        eng = current_engine()
        if condition not in ("exp", "no-exp"):
            raise HTTPException(status_code=422,
                                detail="condition must be 'exp' or 'no-exp'")
        history = eng.history_for(student_id)
        if history is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown student {student_id!r}")
        result = run_recommend(eng, history, student_id, seed)
        return _recommendation_payload(eng, result, condition)

    @app.post("/api/whatif")
    def whatif(body: dict):
        eng = current_engine()
        student_id = body.get("student_id")
        added = body.get("added_courses", [])
        condition = body.get("condition", "no-exp")
        seed = int(body.get("seed", 0))
        if condition not in ("exp", "no-exp"):
            raise HTTPException(status_code=422,
                                detail="condition must be 'exp' or 'no-exp'")
        history = eng.history_for(student_id) if student_id else None
        if history is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown student {student_id!r}")
        for cid in added:
            if cid not in eng.catalog:
                raise HTTPException(status_code=400,
                                    detail=f"unknown course id {cid!r}")
        if added:
            # Hypothetical extra semester; stored history is never mutated.
            history = EnrollmentHistory(
                student_id=history.student_id,
                semesters=[set(s) for s in history.semesters] + [set(added)],
                major=list(history.major),
            )
        result = run_recommend(eng, history, student_id, seed)
        return _recommendation_payload(eng, result, condition)

    @app.post("/api/feedback")
    def post_feedback(body: dict):
        eng = current_engine()
        condition = body.get("condition")
        if condition not in ("exp", "no-exp"):
            raise HTTPException(status_code=422,
                                detail="condition must be 'exp' or 'no-exp'")
        if condition == "no-exp" and ("q4" in body or "q5" in body):
            raise HTTPException(
                status_code=409,
                detail="q4/q5 are only collected under the exp condition")
        try:
            response = SurveyResponse.from_dict(body)
        except (KeyError, ValueError, TypeError) as e:
            raise HTTPException(status_code=422, detail=f"malformed feedback: {e}")
        if eng.feedback_path is None:
            raise HTTPException(status_code=503, detail="feedback log not configured")
        app.state.feedback_log.upsert(response)
        return JSONResponse({"status": "stored",
                             "participant_id": response.participant_id,
                             "course_id": response.course_id})

    if engine is not None and engine.feedback_path is not None:
        app.state.feedback_log = FeedbackLog(
            engine.feedback_path,
            compact_every=engine.config.feedback_compact_every)

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
