"""Operator command line. Every subcommand wraps one module operation, writes
JSON to stdout or --out, and keeps logs on stderr."""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .catalog import Catalog, SyntheticSpec, gold_spans_for_course, load_catalog, \
    load_enrollments, save_catalog, save_enrollments, SKILL_VOCAB
from .config import Config
from .embeddings import DEFAULT_DIM, FileBackedStore, HashedNgramStore, RemoteStore
from .evaluation import load_survey_responses, random_scorer, recall_at_k, span_prf, \
    survey_aggregate
from .explainer import build_explanation
from .recommender import (
    CooccurrenceBaseline, ModelScorer, Vocab, init_params, load_model, recommend,
    save_model, train,
)
from .recommender.ranking import scored_from_dict
from .tagger import (
    FeatureProvider, SkillSpan, Tagger, crf_train, extract_skills,
    load_tagger, save_tagger, tokenize, B_CON, I_CON, O,
)
from .tagger.pipeline import load_phrase_file
from .tagger.spans import DEFAULT_STOPLIST


def _fail(message: str) -> None:
    click.echo(json.dumps({"error": message}), err=True)
    sys.exit(1)


def cli_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, KeyError, OSError) as e:
            _fail(str(e))
    return wrapper


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _load_config(config_path: str | None) -> Config:
    return Config.load(config_path)


def _make_store(provider: str, embeddings_file: str | None, dim: int,
                url: str | None = None):
    if provider == "file":
        if not embeddings_file:
            raise ValueError("--embeddings is required for the file provider")
        return FileBackedStore(embeddings_file)
    if provider == "remote":
        return RemoteStore(url=url)
    return HashedNgramStore(dim=dim)


def _load_skills(catalog: Catalog, skills_path: str) -> None:
    with open(skills_path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            course = catalog.get(rec["course_id"])
            course.skills = [
                SkillSpan(text=s["text"], token_start=s["token_start"],
                          token_end=s["token_end"], votes=s.get("votes", 1))
                for s in rec["skills"]
            ]


@click.group()
def main():
    """skillrec: extract skills, train models, recommend, explain, evaluate."""


@main.command()
@click.option("--out-dir", type=click.Path(), default=".", show_default=True)
@click.option("--departments", type=int, default=12, show_default=True)
@click.option("--courses", type=int, default=120, show_default=True)
@click.option("--students", type=int, default=300, show_default=True)
@click.option("--semesters", type=int, default=4, show_default=True)
@click.option("--rules", type=int, default=6, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@cli_errors
def synth(out_dir, departments, courses, students, semesters, rules, seed):
    """Generate a synthetic corpus: catalog, enrollments, gold spans, gazetteer."""
    from .catalog import synth_generate

    spec = SyntheticSpec(n_departments=departments, n_courses=courses,
                         n_students=students, n_semesters=semesters,
                         n_rules=rules, seed=seed)
    catalog, histories = synth_generate(spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_catalog(catalog, out / "catalog.jsonl")
    save_enrollments(histories, out / "enrollments.jsonl")
    with (out / "gold.jsonl").open("w", encoding="utf-8") as fh:
        for course in catalog:
            spans = gold_spans_for_course(course)
            fh.write(json.dumps({
                "course_id": course.id,
                "spans": [{"start_token": s, "end_token": e} for s, e in spans],
            }) + "\n")
    (out / "gazetteer.txt").write_text("\n".join(SKILL_VOCAB) + "\n", encoding="utf-8")
    click.echo(json.dumps({"courses": len(catalog), "students": len(histories),
                           "out_dir": str(out)}))


@main.command("train-tagger")
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--casing", type=click.Choice(["cased", "uncased"]), default="uncased",
              show_default=True)
@click.option("--epochs", type=int, default=20, show_default=True)
@click.option("--lr", type=float, default=0.015, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@cli_errors
def train_tagger(catalog_path, gold_path, out, casing, epochs, lr, seed):
    """Train the feature-provider CRF tagger on gold span annotations."""
    catalog = load_catalog(catalog_path)
    dataset = []
    with open(gold_path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            course = catalog.get(rec["course_id"])
            tok = tokenize(course.description, casing_mode=casing)
            path = [O] * len(tok.tokens)
            for span in rec["spans"]:
                s, e = span["start_token"], span["end_token"]
                path[s] = B_CON
                for i in range(s + 1, e):
                    path[i] = I_CON
            dataset.append((tok, path))
    provider = FeatureProvider(casing_mode=casing)
    transitions, provider, losses = crf_train(
        dataset, provider, epochs=epochs, learning_rate=lr, seed=seed)
    save_tagger(Tagger(provider=provider, transitions=transitions,
                       casing_mode=casing), out)
    click.echo(json.dumps({"initial_nll": losses[0], "final_nll": losses[-1],
                           "model": out}))


@main.command()
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--tagger", "tagger_paths", multiple=True, type=click.Path(exists=True))
@click.option("--gazetteer", "gazetteer_paths", multiple=True,
              type=click.Path(exists=True))
@click.option("--stoplist", "stoplist_path", type=click.Path(exists=True))
@click.option("--out", type=click.Path())
@cli_errors
def extract(catalog_path, tagger_paths, gazetteer_paths, stoplist_path, out):
    """Extract skills for every course; one JSON line per course."""
    catalog = load_catalog(catalog_path)
    taggers = [load_tagger(p) for p in tagger_paths]
    taggers += [Tagger.from_lexicon(load_phrase_file(p)) for p in gazetteer_paths]
    if not taggers:
        raise ValueError("need at least one --tagger or --gazetteer")
    stoplist = frozenset(load_phrase_file(stoplist_path)) if stoplist_path \
        else DEFAULT_STOPLIST
    lines = []
    for course in catalog:
        if not course.description.strip():
            skills = []
        else:
            skills = extract_skills(course, taggers, stoplist=stoplist)
        lines.append(json.dumps({
            "course_id": course.id,
            "skills": [{"text": s.text, "token_start": s.token_start,
                        "token_end": s.token_end, "votes": s.votes}
                       for s in skills],
        }))
    _emit("\n".join(lines) + "\n", out)


@main.command("train-model")
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--enrollments", "enroll_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--epochs", type=int)
@click.option("--lr", type=float)
@click.option("--d-model", type=int)
@click.option("--mask-rate", type=float)
@click.option("--seed", type=int, default=0, show_default=True)
@cli_errors
def train_model(catalog_path, enroll_path, out, config_path, epochs, lr, d_model,
                mask_rate, seed):
    """Pre-train + fine-tune the masked-sequence recommendation model."""
    cfg = _load_config(config_path)
    epochs = epochs if epochs is not None else cfg.epochs
    lr = lr if lr is not None else cfg.lr
    d_model = d_model if d_model is not None else cfg.d_model
    mask_rate = mask_rate if mask_rate is not None else cfg.mask_rate
    catalog = load_catalog(catalog_path)
    histories = load_enrollments(enroll_path, catalog)
    majors = sorted({m for h in histories for m in h.major})
    max_sem = max(len(h.semesters) for h in histories)
    vocab = Vocab(sorted(catalog.ids()), majors)
    params = init_params(vocab, d_model=d_model, n_positions=max_sem + 4, seed=seed)
    params, history = train(params, histories, epochs=epochs, lr=lr, seed=seed,
                            mask_rate=mask_rate)
    save_model(params, out)
    click.echo(json.dumps({
        "pretrain_loss": history["pretrain"][-1] if history["pretrain"] else None,
        "finetune_loss": history["finetune"][-1] if history["finetune"] else None,
        "model": out,
    }))


def _engine_inputs(catalog_path, enroll_path, model_path, skills_path, dim):
    catalog = load_catalog(catalog_path)
    histories = load_enrollments(enroll_path, catalog)
    params = load_model(model_path)
    if skills_path:
        _load_skills(catalog, skills_path)
    store = HashedNgramStore(dim=dim)
    return catalog, histories, params, store


@main.command("recommend")
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--enrollments", "enroll_path", required=True, type=click.Path(exists=True))
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--skills", "skills_path", type=click.Path(exists=True))
@click.option("--student", required=True)
@click.option("--explain", "with_explanations", is_flag=True)
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--dim", type=int, default=DEFAULT_DIM, show_default=True)
@click.option("--out", type=click.Path())
@cli_errors
def recommend_cmd(catalog_path, enroll_path, model_path, skills_path, student,
                  with_explanations, k, seed, dim, out):
    """Top-k diversified recommendations for one student."""
    catalog, histories, params, store = _engine_inputs(
        catalog_path, enroll_path, model_path, skills_path, dim)
    by_id = {h.student_id: h for h in histories}
    if student not in by_id:
        raise ValueError(f"unknown student {student!r}")
    result = recommend(student, by_id[student], catalog, params, store,
                       seed=seed, k=k)
    payload = {
        "student_id": student,
        "seed": seed,
        "entries": [],
    }
    for cid in result.presentation_order:
        entry = next(e for e in result.recommendations.entries if e.course_id == cid)
        rec = {"course_id": cid, "score": entry.score,
               "department": entry.department,
               "score_rank": result.recommendations.course_ids().index(cid) + 1}
        if with_explanations:
            rec["explanation"] = {
                "learned": [{"text": s.text, "relevance": round(s.relevance, 6)}
                            for s in result.explanations[cid].learned],
                "new": [{"text": s.text, "relevance": round(s.relevance, 6)}
                        for s in result.explanations[cid].new],
            }
        payload["entries"].append(rec)
    _emit(json.dumps(payload, indent=2) + "\n", out)


@main.command("explain")
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--enrollments", "enroll_path", required=True, type=click.Path(exists=True))
@click.option("--skills", "skills_path", required=True, type=click.Path(exists=True))
@click.option("--student", required=True)
@click.option("--course", required=True)
@click.option("--threshold", type=float, default=0.85, show_default=True)
@click.option("--dim", type=int, default=DEFAULT_DIM, show_default=True)
@click.option("--out", type=click.Path())
@cli_errors
def explain_cmd(catalog_path, enroll_path, skills_path, student, course, threshold,
                dim, out):
    """Learned/new skill explanation for one (student, course) pair."""
    catalog = load_catalog(catalog_path)
    histories = load_enrollments(enroll_path, catalog)
    _load_skills(catalog, skills_path)
    by_id = {h.student_id: h for h in histories}
    if student not in by_id:
        raise ValueError(f"unknown student {student!r}")
    store = HashedNgramStore(dim=dim)
    exp = build_explanation(catalog.get(course), by_id[student], catalog, store,
                            threshold=threshold)
    _emit(json.dumps(exp.to_dict(), indent=2) + "\n", out)


@main.command("eval-extraction")
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--pred", "pred_path", required=True, type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(["micro", "macro"]), default="micro",
              show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json",
              show_default=True)
@click.option("--out", type=click.Path())
@cli_errors
def eval_extraction(gold_path, pred_path, mode, fmt, out):
    """Span precision/recall/F1 of predicted skills against gold annotations."""
    def read_spans(path, key):
        spans = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                spans[rec["course_id"]] = {
                    (s.get("start_token", s.get("token_start")),
                     s.get("end_token", s.get("token_end")))
                    for s in rec[key]
                }
        return spans

    gold = read_spans(gold_path, "spans")
    pred = read_spans(pred_path, "skills")
    report = span_prf(gold, pred, mode=mode)
    text = json.dumps(report.to_dict(), indent=2) if fmt == "json" else report.to_text()
    _emit(text + "\n", out)


@main.command("eval-recall")
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--enrollments", "enroll_path", required=True, type=click.Path(exists=True))
@click.option("--model", "model_path", type=click.Path(exists=True))
@click.option("--scorer", type=click.Choice(["model", "cooccurrence", "random"]),
              default="model", show_default=True)
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--diversified", is_flag=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path())
@cli_errors
def eval_recall(catalog_path, enroll_path, model_path, scorer, k, diversified, seed,
                out):
    """Offline recall@k with the final semester held out."""
    catalog = load_catalog(catalog_path)
    histories = load_enrollments(enroll_path, catalog)
    eligible = [h for h in histories if len(h.semesters) >= 2]
    if scorer == "model":
        if not model_path:
            raise ValueError("--model is required for the model scorer")
        params = load_model(model_path)
        fn = ModelScorer(params, catalog)
    elif scorer == "cooccurrence":
        baseline = CooccurrenceBaseline(histories, sorted(catalog.ids()))
        fn = lambda h: scored_from_dict(baseline.score(h), h, catalog)  # noqa: E731
    else:
        fn = random_scorer(catalog, seed)
    value = recall_at_k(fn, eligible, catalog, k=k, diversified=diversified)
    _emit(json.dumps({"scorer": scorer, "k": k, "diversified": diversified,
                      "recall": value, "students": len(eligible)}) + "\n", out)


@main.command("aggregate-survey")
@click.option("--feedback", "feedback_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json",
              show_default=True)
@click.option("--out", type=click.Path())
@cli_errors
def aggregate_survey(feedback_path, fmt, out):
    """Summarize survey feedback: condition means, serendipity, neutrality."""
    responses = load_survey_responses(feedback_path)
    summary = survey_aggregate(responses)
    text = json.dumps(summary.to_dict(), indent=2) if fmt == "json" \
        else summary.to_text()
    _emit(text + "\n", out)


@main.command("serve")
@click.option("--catalog", "catalog_path", type=click.Path())
@click.option("--enrollments", "enroll_path", type=click.Path())
@click.option("--model", "model_path", type=click.Path())
@click.option("--skills", "skills_path", type=click.Path())
@click.option("--feedback", "feedback_path", type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--port", type=int)
@click.option("--static-dir", type=click.Path())
@click.option("--dim", type=int, default=DEFAULT_DIM, show_default=True)
@cli_errors
def serve(catalog_path, enroll_path, model_path, skills_path, feedback_path,
          config_path, port, static_dir, dim):
    """Run the HTTP service. Paths default into the configured data dir
    ($SKILLREC_DATA_DIR or config data_dir)."""
    import uvicorn

    from .service import EngineState, create_app

    cfg = _load_config(config_path)
    if port is not None:
        cfg.port = port
    data = Path(cfg.data_dir)
    catalog_path = catalog_path or data / "catalog.jsonl"
    enroll_path = enroll_path or data / "enrollments.jsonl"
    model_path = model_path or data / "model.json"
    if skills_path is None and (data / "skills.jsonl").exists():
        skills_path = data / "skills.jsonl"
    feedback_path = feedback_path or data / "feedback.jsonl"
    for p in (catalog_path, enroll_path, model_path):
        if not Path(p).exists():
            raise ValueError(f"missing input file: {p}")
    catalog, histories, params, store = _engine_inputs(
        catalog_path, enroll_path, model_path, skills_path, dim)
    engine = EngineState(
        catalog=catalog,
        histories={h.student_id: h for h in histories},
        model=params,
        store=store,
        config=cfg,
        feedback_path=Path(feedback_path),
    )
    app = create_app(engine, static_dir=static_dir)
    uvicorn.run(app, host="0.0.0.0", port=cfg.port)


if __name__ == "__main__":
    main()
