"""Linear-chain CRF over the three-label scheme.

Emissions come from a pluggable provider as an (n, 3) matrix of unnormalized
log-potentials. The chain adds a 3x3 transition matrix plus start/stop
vectors. Inference is Viterbi; the partition function for training is the
forward algorithm in log space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .labels import N_LABELS, O, I_CON, FORBIDDEN_SCORE
from .tokenize import TokenizedText


@dataclass
class TransitionMatrix:
    scores: np.ndarray = field(default_factory=lambda: np.zeros((N_LABELS, N_LABELS)))
    start: np.ndarray = field(default_factory=lambda: np.zeros(N_LABELS))
    stop: np.ndarray = field(default_factory=lambda: np.zeros(N_LABELS))

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float).copy()
        self.start = np.asarray(self.start, dtype=float).copy()
        self.stop = np.asarray(self.stop, dtype=float).copy()
        if self.scores.shape != (N_LABELS, N_LABELS):
            raise ValueError(f"transition matrix must be {N_LABELS}x{N_LABELS}")
        self.pin_forbidden()

    def pin_forbidden(self) -> None:
        """O -> I-CON is structurally impossible; keep it at the sentinel."""
        self.scores[O, I_CON] = FORBIDDEN_SCORE

    def copy(self) -> "TransitionMatrix":
        return TransitionMatrix(self.scores.copy(), self.start.copy(), self.stop.copy())


def _check_emissions(emissions: np.ndarray) -> np.ndarray:
    emissions = np.asarray(emissions, dtype=float)
    if emissions.ndim != 2 or emissions.shape[1] != N_LABELS:
        raise ValueError(f"emissions must be (n, {N_LABELS}), got {emissions.shape}")
    if not np.all(np.isfinite(emissions)):
        raise ValueError("emissions must be finite")
    return emissions


def path_score(emissions: np.ndarray, transitions: TransitionMatrix,
               path: list[int]) -> float:
    """Unnormalized score of one label sequence."""
    emissions = np.asarray(emissions, dtype=float)
    if len(path) == 0:
        return 0.0
    total = transitions.start[path[0]] + emissions[0, path[0]]
    for t in range(1, len(path)):
        total += transitions.scores[path[t - 1], path[t]] + emissions[t, path[t]]
    total += transitions.stop[path[-1]]
    return float(total)


def viterbi_decode(emissions: np.ndarray, transitions: TransitionMatrix) -> list[int]:
    """Highest-scoring label sequence.

    Dynamic program runs from the end toward the front (delta[t, y] = best
    suffix score given label y at t), then the path is rebuilt left to right
    taking the lowest label index whenever scores tie. That makes the result
    the lexicographically smallest argmax, which is also what a brute-force
    enumeration in lexicographic order with strict improvement returns.
    """
    emissions = _check_emissions(emissions)
    n = emissions.shape[0]
    if n == 0:
        return []
    delta = np.empty((n, N_LABELS))
    delta[n - 1] = emissions[n - 1] + transitions.stop
    for t in range(n - 2, -1, -1):
        # (y, j): transition y->j plus best suffix from j.
        cont = transitions.scores + delta[t + 1][None, :]
        delta[t] = emissions[t] + cont.max(axis=1)
    path = [int(np.argmax(transitions.start + delta[0]))]
    for t in range(1, n):
        step = transitions.scores[path[-1]] + delta[t]
        path.append(int(np.argmax(step)))
    return path


def forward_log_partition(emissions: np.ndarray, transitions: TransitionMatrix) -> float:
    """log Z via the forward recursion in log space."""
    emissions = _check_emissions(emissions)
    n = emissions.shape[0]
    if n == 0:
        return 0.0
    alpha = transitions.start + emissions[0]
    for t in range(1, n):
        alpha = logsumexp(alpha[:, None] + transitions.scores, axis=0) + emissions[t]
    return float(logsumexp(alpha + transitions.stop))


def _validate_gold(path: list[int], n: int) -> None:
    if len(path) != n:
        raise ValueError(f"gold path length {len(path)} != token count {n}")
    for y in path:
        if not 0 <= y < N_LABELS:
            raise ValueError(f"label index {y} out of range")
    for a, b in zip(path, path[1:]):
        if a == O and b == I_CON:
            raise ValueError("gold path contains forbidden O -> I-CON transition")


def crf_log_likelihood(emissions: np.ndarray, transitions: TransitionMatrix,
                       gold_path: list[int]) -> float:
    """log p(gold | emissions) = score(gold) - log Z. Always <= 0."""
    emissions = _check_emissions(emissions)
    _validate_gold(gold_path, emissions.shape[0])
    if emissions.shape[0] == 0:
        return 0.0
    return path_score(emissions, transitions, gold_path) - forward_log_partition(
        emissions, transitions)


def _forward_backward(emissions: np.ndarray, transitions: TransitionMatrix):
    """Alpha/beta tables (log space) and log Z."""
    n = emissions.shape[0]
    alpha = np.empty((n, N_LABELS))
    alpha[0] = transitions.start + emissions[0]
    for t in range(1, n):
        alpha[t] = logsumexp(alpha[t - 1][:, None] + transitions.scores, axis=0) + emissions[t]
    log_z = float(logsumexp(alpha[n - 1] + transitions.stop))

    beta = np.empty((n, N_LABELS))
    beta[n - 1] = transitions.stop
    for t in range(n - 2, -1, -1):
        beta[t] = logsumexp(
            transitions.scores + (emissions[t + 1] + beta[t + 1])[None, :], axis=1)
    return alpha, beta, log_z


def crf_gradients(emissions: np.ndarray, transitions: TransitionMatrix,
                  gold_path: list[int]):
    """Gradients of the negative log-likelihood for one sequence.

    Returns (nll, d_transitions, d_start, d_stop, d_emissions). Each gradient
    is expected counts under the model minus observed counts in the gold path.
    """
    emissions = _check_emissions(emissions)
    n = emissions.shape[0]
    _validate_gold(gold_path, n)
    if n == 0:
        return 0.0, np.zeros((N_LABELS, N_LABELS)), np.zeros(N_LABELS), np.zeros(N_LABELS), \
            np.zeros((0, N_LABELS))

    alpha, beta, log_z = _forward_backward(emissions, transitions)
    nll = log_z - path_score(emissions, transitions, gold_path)

    node_marg = np.exp(alpha + beta - log_z)            # (n, 3)

    d_em = node_marg.copy()
    d_em[np.arange(n), gold_path] -= 1.0

    d_start = node_marg[0].copy()
    d_start[gold_path[0]] -= 1.0
    d_stop = node_marg[n - 1].copy()
    d_stop[gold_path[-1]] -= 1.0

    d_trans = np.zeros((N_LABELS, N_LABELS))
    for t in range(1, n):
        edge = alpha[t - 1][:, None] + transitions.scores \
            + (emissions[t] + beta[t])[None, :] - log_z
        d_trans += np.exp(edge)
        d_trans[gold_path[t - 1], gold_path[t]] -= 1.0
    return float(nll), d_trans, d_start, d_stop, d_em


def mean_nll(dataset, provider, transitions: TransitionMatrix) -> float:
    total = 0.0
    for text, gold in dataset:
        total += -crf_log_likelihood(provider.emissions(text), transitions, gold)
    return total / len(dataset)


def crf_train(dataset: list[tuple[TokenizedText, list[int]]], provider,
              epochs: int = 20, learning_rate: float = 0.015, seed: int = 0,
              batch_size: int = 10, momentum: float = 0.9,
              lr_decay: float = 0.05, grad_clip: float = 5.0):
    """Mini-batch SGD with momentum over transition + provider parameters.

    The per-epoch learning rate decays as lr / (1 + lr_decay * epoch); the
    global gradient norm is clipped at grad_clip. Returns the trained
    transitions, the provider (updated in place), and the per-epoch mean NLL
    trace (epochs + 1 entries, the first being the untrained loss).
    """
    if not dataset:
        raise ValueError("training dataset is empty")
    for text, gold in dataset:
        _validate_gold(gold, len(text.tokens))

    rng = np.random.default_rng(seed)
    transitions = TransitionMatrix()
    velocity = {
        "trans": np.zeros((N_LABELS, N_LABELS)),
        "start": np.zeros(N_LABELS),
        "stop": np.zeros(N_LABELS),
    }
    prov_params = provider.params
    for name in prov_params:
        velocity[f"prov:{name}"] = np.zeros_like(prov_params[name])

    losses = [mean_nll(dataset, provider, transitions)]
    for epoch in range(epochs):
        lr_t = learning_rate / (1.0 + lr_decay * epoch)
        order = rng.permutation(len(dataset))
        for lo in range(0, len(dataset), batch_size):
            batch = [dataset[i] for i in order[lo:lo + batch_size]]
            grads = {k: np.zeros_like(v) for k, v in velocity.items()}
            for text, gold in batch:
                em = provider.emissions(text)
                _, g_trans, g_start, g_stop, g_em = crf_gradients(em, transitions, gold)
                grads["trans"] += g_trans
                grads["start"] += g_start
                grads["stop"] += g_stop
                for name, g in provider.param_grads(text, g_em).items():
                    grads[f"prov:{name}"] += g
            for k in grads:
                grads[k] /= len(batch)
            gnorm = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
            if gnorm > grad_clip:
                for k in grads:
                    grads[k] *= grad_clip / gnorm
            for k in grads:
                velocity[k] = momentum * velocity[k] - lr_t * grads[k]
            transitions.scores += velocity["trans"]
            transitions.start += velocity["start"]
            transitions.stop += velocity["stop"]
            transitions.pin_forbidden()
            for name in prov_params:
                prov_params[name] += velocity[f"prov:{name}"]
        losses.append(mean_nll(dataset, provider, transitions))
    return transitions, provider, losses
