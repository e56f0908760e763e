#!/usr/bin/env python3
"""Walk through the skill-extraction pipeline: tokenization, CRF decoding,
multi-tagger combination, and post-processing.

Run: python demos/01_skill_extraction.py
"""

from skillrec.catalog import Course, SKILL_VOCAB, SyntheticSpec, \
    gold_spans_for_course, synth_generate
from skillrec.evaluation import span_prf
from skillrec.tagger import (
    FeatureProvider, Tagger, crf_train, ensemble_combine, extract_skills,
    postprocess_skills, spans_from_tags, tokenize, viterbi_decode, B_CON, I_CON, O,
)

DESCRIPTION = (
    "This course emphasizes the study of the basic data structures of computer "
    "science (stacks, queues, trees, lists) and their implementations using the "
    "java language included in this study are programming techniques which use "
    "recursion, reference variables, and dynamic memory allocation."
)

print("=" * 72)
print("1. Tokenization")
print("=" * 72)
tok = tokenize(DESCRIPTION, casing_mode="uncased")
print(f"{len(tok.tokens)} tokens; first 14: {tok.tokens[:14]}")
print("edge punctuation becomes its own token:",
      [t for t in tok.tokens if len(t) == 1 and not t.isalnum()][:6])

print()
print("=" * 72)
print("2. A lexicon tagger: gazetteer phrases drive the emission scores")
print("=" * 72)
phrases = ["data structures", "computer science", "stacks", "queues", "trees",
           "lists", "java language", "programming techniques", "recursion",
           "reference variables", "dynamic memory allocation"]
lexicon = Tagger.from_lexicon(phrases)
path = viterbi_decode(lexicon.provider.emissions(tok), lexicon.transitions)
labels = {O: "O", B_CON: "B", I_CON: "I"}
print("decoded labels (first 20):", [labels[y] for y in path[:20]])
spans = spans_from_tags(path, tok)
print("spans:", [s.text for s in spans])

print()
print("=" * 72)
print("3. Training the feature-provider CRF on synthetic gold annotations")
print("=" * 72)
spec = SyntheticSpec(n_departments=4, n_courses=40, n_students=0,
                     n_semesters=3, seed=3)
catalog, _ = synth_generate(spec)
dataset = []
for course in catalog:
    t = tokenize(course.description, casing_mode="uncased")
    gold = [O] * len(t.tokens)
    for s, e in gold_spans_for_course(course):
        gold[s] = B_CON
        for i in range(s + 1, e):
            gold[i] = I_CON
    dataset.append((t, gold))
provider = FeatureProvider(casing_mode="uncased")
transitions, provider, losses = crf_train(dataset, provider, epochs=12,
                                          learning_rate=0.015, seed=0)
print(f"mean NLL: {losses[0]:.3f} -> {losses[-1]:.3f} over {len(losses) - 1} epochs")
trained = Tagger(provider=provider, transitions=transitions, casing_mode="uncased")

print()
print("=" * 72)
print("4. Stacking ensemble + post-processing")
print("=" * 72)
course = Course("DEMO", "Algorithms", "CS", DESCRIPTION)
sets = [lexicon.tag(DESCRIPTION), trained.tag(DESCRIPTION)]
combined = ensemble_combine(sets)
print("combined (votes desc):",
      [(s.text, s.votes) for s in combined[:8]])
cleaned = postprocess_skills(combined)
print("after stoplist/5-word/plural cleanup:", [s.text for s in cleaned][:10])

skills = extract_skills(course, [lexicon, trained])
print("extract_skills stores onto the course:", sorted(s.text for s in skills)[:8])

print()
print("=" * 72)
print("5. Span-level evaluation against gold annotations")
print("=" * 72)
gold_spans = {}
pred_spans = {}
for c in list(catalog)[:20]:
    gold_spans[c.id] = set(gold_spans_for_course(c))
    pred_spans[c.id] = {(s.token_start, s.token_end)
                        for s in extract_skills(c, [trained])}
for mode in ("micro", "macro"):
    rep = span_prf(gold_spans, pred_spans, mode=mode)
    print(f"{mode:5s}  P={rep.precision:.3f} R={rep.recall:.3f} F1={rep.f1:.3f}")
