"""Emission providers: per-token (n, 3) log-potential scorers.

Neural encoders are out of scope here; these two providers keep the CRF math
exercisable at desk scale. The lexicon provider scores from a gazetteer of
known phrases; the feature provider learns per-feature weights jointly with
the CRF.
"""

from __future__ import annotations

import numpy as np

from .labels import N_LABELS, O, B_CON, I_CON
from .tokenize import TokenizedText


class LexiconProvider:
    """Gazetteer matcher: B-CON at a phrase start, I-CON inside, O elsewhere.

    Longest match wins at each position; matches never overlap. No trainable
    parameters and no noise, so emissions are a pure function of the text.
    """

    def __init__(self, phrases: list[str] | set[str], margin: float = 4.0,
                 casing_mode: str = "uncased"):
        self.casing_mode = casing_mode
        norm = (lambda p: p.lower()) if casing_mode == "uncased" else (lambda p: p)
        self.phrase_tokens = sorted(
            {tuple(norm(p).split()) for p in phrases if p.strip()},
            key=len, reverse=True)
        self.margin = float(margin)
        self.params: dict[str, np.ndarray] = {}

    def emissions(self, text: TokenizedText) -> np.ndarray:
        n = len(text.tokens)
        em = np.zeros((n, N_LABELS))
        em[:, O] = self.margin
        i = 0
        while i < n:
            hit = 0
            for ptoks in self.phrase_tokens:
                m = len(ptoks)
                if i + m <= n and tuple(text.tokens[i:i + m]) == ptoks:
                    hit = m
                    break
            if hit:
                em[i, :] = -self.margin
                em[i, B_CON] = self.margin
                for j in range(i + 1, i + hit):
                    em[j, :] = -self.margin
                    em[j, I_CON] = self.margin
                i += hit
            else:
                i += 1
        return em

    def param_grads(self, text: TokenizedText, d_emissions: np.ndarray) -> dict:
        return {}

    def config(self) -> dict:
        return {
            "type": "lexicon",
            "casing_mode": self.casing_mode,
            "margin": self.margin,
            "phrases": [" ".join(p) for p in self.phrase_tokens],
        }


FEATURE_NAMES = [
    "bias", "init_cap", "all_caps", "has_digit", "is_punct",
    "rel_position", "is_first", "is_last", "length", "log_sent_freq",
]


def token_features(text: TokenizedText) -> np.ndarray:
    """Hand feature matrix (n, F). Cheap surface cues only."""
    n = len(text.tokens)
    feats = np.zeros((n, len(FEATURE_NAMES)))
    counts: dict[str, int] = {}
    for tok in text.tokens:
        counts[tok] = counts.get(tok, 0) + 1
    for i, tok in enumerate(text.tokens):
        raw = text.source[text.char_offsets[i][0]:text.char_offsets[i][1]]
        feats[i, 0] = 1.0
        feats[i, 1] = 1.0 if raw[:1].isupper() else 0.0
        feats[i, 2] = 1.0 if len(raw) > 1 and raw.isupper() else 0.0
        feats[i, 3] = 1.0 if any(ch.isdigit() for ch in raw) else 0.0
        feats[i, 4] = 1.0 if not any(ch.isalnum() for ch in raw) else 0.0
        feats[i, 5] = i / max(1, n - 1)
        feats[i, 6] = 1.0 if i == 0 else 0.0
        feats[i, 7] = 1.0 if i == n - 1 else 0.0
        feats[i, 8] = min(len(tok), 12) / 12.0
        feats[i, 9] = np.log1p(counts[tok])
    return feats


class FeatureProvider:
    """Linear emissions over hand features: E[t, y] = W[y] . f(t).

    W is trained jointly with the CRF through param_grads (chain rule:
    dNLL/dW[y] = sum_t dNLL/dE[t, y] * f(t)).
    """

    def __init__(self, casing_mode: str = "cased", weights: np.ndarray | None = None):
        self.casing_mode = casing_mode
        n_feats = len(FEATURE_NAMES)
        if weights is None:
            weights = np.zeros((N_LABELS, n_feats))
        self.params: dict[str, np.ndarray] = {"weights": np.asarray(weights, dtype=float)}

    def emissions(self, text: TokenizedText) -> np.ndarray:
        return token_features(text) @ self.params["weights"].T

    def param_grads(self, text: TokenizedText, d_emissions: np.ndarray) -> dict:
        return {"weights": d_emissions.T @ token_features(text)}

    def config(self) -> dict:
        return {
            "type": "feature",
            "casing_mode": self.casing_mode,
            "weights": self.params["weights"].tolist(),
        }


def provider_from_config(cfg: dict):
    kind = cfg.get("type")
    if kind == "lexicon":
        return LexiconProvider(cfg["phrases"], margin=cfg.get("margin", 4.0),
                               casing_mode=cfg.get("casing_mode", "uncased"))
    if kind == "feature":
        return FeatureProvider(casing_mode=cfg.get("casing_mode", "cased"),
                               weights=np.asarray(cfg["weights"], dtype=float))
    raise ValueError(f"unknown provider type {kind!r}")
