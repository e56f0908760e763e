from .masking import (
    MASK_TOKEN,
    SequenceExample,
    MaskedBatch,
    sequence_from_history,
    mask_sampling,
    mask_latest_semester,
)
from .model import Vocab, ModelParams, init_params, model_forward, loss_and_grads, train, \
    save_model, load_model
from .baseline import CooccurrenceBaseline
from .ranking import ScoredCourse, RecommendationList, ModelScorer, score_candidates, \
    diversify, recommend, RecommendationResult

__all__ = [
    "MASK_TOKEN", "SequenceExample", "MaskedBatch", "sequence_from_history",
    "mask_sampling", "mask_latest_semester",
    "Vocab", "ModelParams", "init_params", "model_forward", "loss_and_grads", "train",
    "save_model", "load_model",
    "CooccurrenceBaseline",
    "ScoredCourse", "RecommendationList", "ModelScorer", "score_candidates", "diversify",
    "recommend", "RecommendationResult",
]
