from .labels import LABELS, O, B_CON, I_CON, FORBIDDEN_SCORE
from .tokenize import TokenizedText, tokenize
from .crf import (
    TransitionMatrix,
    viterbi_decode,
    crf_log_likelihood,
    crf_gradients,
    crf_train,
)
from .spans import SkillSpan, spans_from_tags, ensemble_combine, postprocess_skills, DEFAULT_STOPLIST
from .providers import LexiconProvider, FeatureProvider
from .pipeline import Tagger, extract_skills, save_tagger, load_tagger

__all__ = [
    "LABELS", "O", "B_CON", "I_CON", "FORBIDDEN_SCORE",
    "TokenizedText", "tokenize",
    "TransitionMatrix", "viterbi_decode", "crf_log_likelihood", "crf_gradients", "crf_train",
    "SkillSpan", "spans_from_tags", "ensemble_combine", "postprocess_skills", "DEFAULT_STOPLIST",
    "LexiconProvider", "FeatureProvider",
    "Tagger", "extract_skills", "save_tagger", "load_tagger",
]
