"""Toy bidirectional-attention masked-course model, pure numpy.

One self-attention block with a residual connection, course/position/major
embedding tables, and an untied output projection. Deliberately desk-scale:
the point is exercising the masked-training protocol and producing scores a
ranking layer can consume, with gradients simple enough to verify by finite
differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .masking import MASK_TOKEN, MaskedBatch, SequenceExample, mask_latest_semester, \
    mask_sampling, sequence_from_history

MODEL_FORMAT_VERSION = 1

# w_out exists only for untied output projections; tied models score against
# the course embedding table directly.
PARAM_GROUPS = ("course_emb", "pos_emb", "major_emb",
                "wq", "wk", "wv", "wo", "w_out", "b_out")


class Vocab:
    """Course-id and major-token index maps, with MASK/UNK specials."""

    def __init__(self, course_ids: list[str], majors: list[str]):
        self.course_ids = list(course_ids)
        self._course_index = {cid: i for i, cid in enumerate(self.course_ids)}
        self.mask_id = len(self.course_ids)
        self.unk_id = len(self.course_ids) + 1
        self.majors = list(majors)
        self._major_index = {m: i for i, m in enumerate(self.majors)}
        self.major_unk_id = len(self.majors)

    @property
    def n_courses(self) -> int:
        return len(self.course_ids)

    def encode_item(self, item: str) -> int:
        if item == MASK_TOKEN:
            return self.mask_id
        return self._course_index.get(item, self.unk_id)

    def encode_major(self, major: str) -> int:
        return self._major_index.get(major, self.major_unk_id)


@dataclass
class ModelParams:
    vocab: Vocab
    d_model: int
    n_positions: int
    seed: int
    weights: dict[str, np.ndarray] = field(default_factory=dict)
    tied_output: bool = False

    def copy(self) -> "ModelParams":
        return ModelParams(self.vocab, self.d_model, self.n_positions, self.seed,
                           {k: v.copy() for k, v in self.weights.items()},
                           self.tied_output)


def init_params(vocab: Vocab, d_model: int = 32, n_positions: int = 16,
                seed: int = 0, tied_output: bool = False) -> ModelParams:
    if not 8 <= d_model <= 64:
        raise ValueError("d_model must stay in the desk-scale range [8, 64]")
    rng = np.random.default_rng(seed)
    scale = 0.1
    v = vocab.n_courses
    w = {
        "course_emb": rng.normal(0.0, scale, size=(v + 2, d_model)),
        "pos_emb": rng.normal(0.0, scale, size=(n_positions, d_model)),
        "major_emb": rng.normal(0.0, scale, size=(len(vocab.majors) + 1, d_model)),
        "wq": rng.normal(0.0, scale, size=(d_model, d_model)),
        "wk": rng.normal(0.0, scale, size=(d_model, d_model)),
        "wv": rng.normal(0.0, scale, size=(d_model, d_model)),
        "wo": rng.normal(0.0, scale, size=(d_model, d_model)),
        "b_out": np.zeros(v),
    }
    if not tied_output:
        w["w_out"] = rng.normal(0.0, scale, size=(d_model, v))
    return ModelParams(vocab=vocab, d_model=d_model, n_positions=n_positions,
                       seed=seed, weights=w, tied_output=tied_output)


def _softmax_rows(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _encode_batch(params: ModelParams, batch: MaskedBatch):
    vocab = params.vocab
    ids = np.array([vocab.encode_item(it) for it in batch.input_items])
    pos = np.array(batch.positions)
    if pos.size and pos.max() >= params.n_positions:
        raise ValueError(f"position {int(pos.max())} outside the table "
                         f"(n_positions={params.n_positions})")
    major_ids = np.array([vocab.encode_major(m) for m in batch.majors], dtype=int)
    targets = np.array([vocab.encode_item(it) for it in batch.target_items])
    if np.any(targets >= vocab.n_courses):
        raise ValueError("target items must be in-vocabulary courses")
    return ids, pos, major_ids, targets


def _forward(params: ModelParams, batch: MaskedBatch):
    """Full forward pass; returns logits at masked slots plus a backprop cache."""
    w = params.weights
    ids, pos, major_ids, targets = _encode_batch(params, batch)
    n = len(ids)
    d = params.d_model

    major_vec = np.zeros(d) if major_ids.size == 0 \
        else w["major_emb"][major_ids].mean(axis=0)
    x = w["course_emb"][ids] + w["pos_emb"][pos] + major_vec

    q = x @ w["wq"]
    k = x @ w["wk"]
    v = x @ w["wv"]
    scores = (q @ k.T) / np.sqrt(d)
    attn = _softmax_rows(scores)
    ctx = attn @ v
    h = x + ctx @ w["wo"]

    mask_idx = np.array(batch.target_indices)
    out_matrix = w["course_emb"][:params.vocab.n_courses].T if params.tied_output \
        else w["w_out"]
    logits = h[mask_idx] @ out_matrix + w["b_out"]

    cache = {
        "ids": ids, "pos": pos, "major_ids": major_ids, "targets": targets,
        "x": x, "q": q, "k": k, "v": v, "attn": attn, "ctx": ctx, "h": h,
        "mask_idx": mask_idx, "n": n, "out_matrix": out_matrix,
    }
    return logits, attn, cache


def model_forward(params: ModelParams, batch: MaskedBatch):
    """Score vectors over the course vocabulary for each masked position.

    Returns (logits, attention); logits has shape (n_masked, n_courses) and
    each attention row is a probability distribution over sequence slots.
    """
    logits, attn, _ = _forward(params, batch)
    return logits, attn


def _example_grads(params: ModelParams, batch: MaskedBatch):
    """Summed cross-entropy over this batch's masked positions and its grads."""
    w = params.weights
    logits, _, c = _forward(params, batch)
    probs = _softmax_rows(logits)
    m = len(c["mask_idx"])
    rows = np.arange(m)
    ce_sum = float(-np.log(probs[rows, c["targets"]] + 1e-300).sum())

    d_logits = probs.copy()
    d_logits[rows, c["targets"]] -= 1.0

    g = {name: np.zeros_like(arr) for name, arr in w.items()}
    g["b_out"] = d_logits.sum(axis=0)
    if params.tied_output:
        g["course_emb"][:params.vocab.n_courses] += d_logits.T @ c["h"][c["mask_idx"]]
    else:
        g["w_out"] = c["h"][c["mask_idx"]].T @ d_logits

    dh = np.zeros_like(c["h"])
    dh[c["mask_idx"]] += d_logits @ c["out_matrix"].T

    dx = dh.copy()                      # residual branch
    d_ctx_wo = dh                       # h = x + ctx @ wo
    g["wo"] = c["ctx"].T @ d_ctx_wo
    d_ctx = d_ctx_wo @ w["wo"].T

    d_attn = d_ctx @ c["v"].T
    dv = c["attn"].T @ d_ctx
    # softmax backward, row-wise
    d_scores = c["attn"] * (d_attn - (d_attn * c["attn"]).sum(axis=1, keepdims=True))
    scale = 1.0 / np.sqrt(params.d_model)
    dq = d_scores @ c["k"] * scale
    dk = d_scores.T @ c["q"] * scale

    g["wq"] = c["x"].T @ dq
    g["wk"] = c["x"].T @ dk
    g["wv"] = c["x"].T @ dv
    dx += dq @ w["wq"].T + dk @ w["wk"].T + dv @ w["wv"].T

    np.add.at(g["course_emb"], c["ids"], dx)
    np.add.at(g["pos_emb"], c["pos"], dx)
    if c["major_ids"].size:
        d_major = dx.sum(axis=0) / c["major_ids"].size
        np.add.at(g["major_emb"], c["major_ids"], d_major)
    return ce_sum, m, g


def loss_and_grads(params: ModelParams, batches: list[MaskedBatch]):
    """Mean cross-entropy over every masked position in the batches + grads."""
    if not batches:
        raise ValueError("no batches")
    total_ce = 0.0
    total_masked = 0
    acc = {name: np.zeros_like(arr) for name, arr in params.weights.items()}
    for batch in batches:
        ce_sum, m, g = _example_grads(params, batch)
        total_ce += ce_sum
        total_masked += m
        for name in acc:
            acc[name] += g[name]
    for name in acc:
        acc[name] /= total_masked
    return total_ce / total_masked, acc


def corpus_loss(params: ModelParams, batches: list[MaskedBatch]) -> float:
    loss, _ = loss_and_grads(params, batches)
    return loss


def train(params: ModelParams, corpus, epochs: int = 20, lr: float = 0.3,
          seed: int = 0, pretrain_epochs: int | None = None,
          finetune_epochs: int | None = None, mask_rate: float = 0.3,
          batch_size: int = 16, momentum: float = 0.9,
          weight_decay: float = 1e-4, grad_clip: float = 5.0) -> tuple[ModelParams, dict]:
    """Two-phase training: percentage-sampling pre-training, then fine-tuning
    on latest-semester prediction. SGD with momentum and a light L2 penalty;
    deterministic under seed.

    Returns the trained params (a copy; the input is untouched) and a history
    dict with per-epoch losses for both phases.
    """
    examples = [sequence_from_history(h) if not isinstance(h, SequenceExample) else h
                for h in corpus]
    if not examples:
        raise ValueError("training corpus is empty")
    params = params.copy()
    pre_n = epochs if pretrain_epochs is None else pretrain_epochs
    fine_n = epochs if finetune_epochs is None else finetune_epochs
    rng = np.random.default_rng(seed)
    history = {"pretrain": [], "finetune": []}
    velocity = {name: np.zeros_like(w) for name, w in params.weights.items()}

    def run_phase(n_epochs: int, make_batches, log: list):
        for epoch in range(n_epochs):
            order = rng.permutation(len(examples))
            epoch_ce = 0.0
            epoch_masked = 0
            for lo in range(0, len(order), batch_size):
                chunk = [examples[i] for i in order[lo:lo + batch_size]]
                batches = make_batches(chunk, epoch, lo)
                if not batches:
                    continue
                loss, grads = loss_and_grads(params, batches)
                n_masked = sum(len(b.target_indices) for b in batches)
                epoch_ce += loss * n_masked
                epoch_masked += n_masked
                gnorm = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
                clip = grad_clip / gnorm if gnorm > grad_clip else 1.0
                for name in params.weights:
                    g = clip * grads[name] + weight_decay * params.weights[name]
                    velocity[name] = momentum * velocity[name] - lr * g
                    params.weights[name] += velocity[name]
            log.append(epoch_ce / max(1, epoch_masked))

    def pretrain_batches(chunk, epoch, lo):
        out = []
        for j, ex in enumerate(chunk):
            if len(ex) == 0:
                continue
            out.append(mask_sampling(ex, mask_rate,
                                     seed=seed * 1_000_003 + epoch * 10_007 + lo + j))
        return out

    def finetune_batches(chunk, epoch, lo):
        return [mask_latest_semester(ex) for ex in chunk if ex.n_semesters >= 2]

    run_phase(pre_n, pretrain_batches, history["pretrain"])
    run_phase(fine_n, finetune_batches, history["finetune"])
    return params, history


def save_model(params: ModelParams, path: str | Path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "d_model": params.d_model,
        "n_positions": params.n_positions,
        "seed": params.seed,
        "tied_output": params.tied_output,
        "course_ids": params.vocab.course_ids,
        "majors": params.vocab.majors,
        "weights": {k: v.tolist() for k, v in params.weights.items()},
    }
    Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> ModelParams:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model version {payload.get('format_version')!r}")
    vocab = Vocab(payload["course_ids"], payload["majors"])
    weights = {k: np.array(v, dtype=float) for k, v in payload["weights"].items()}
    return ModelParams(vocab=vocab, d_model=payload["d_model"],
                       n_positions=payload["n_positions"], seed=payload["seed"],
                       weights=weights, tied_output=payload.get("tied_output", True))
