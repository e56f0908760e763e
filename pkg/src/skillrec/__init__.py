"""skillrec: skill extraction from course descriptions, masked-sequence course
recommendation with per-department diversification, and learned/new-skill
explanations for every recommendation."""

from . import catalog, embeddings, evaluation, explainer, recommender, tagger

__version__ = "0.1.0"

__all__ = ["catalog", "embeddings", "evaluation", "explainer", "recommender",
           "tagger", "__version__"]
