"""Vector representations for skills and course descriptions.

Cosine similarity is the single geometric primitive everything downstream
uses. Three interchangeable stores provide vectors: exact file-backed
lookup, deterministic hashed character n-grams, and a remote HTTP encoder
with a local disk cache.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from pathlib import Path

import numpy as np

DEFAULT_DIM = 768
EMBED_URL_ENV = "SKILLREC_EMBED_URL"


class EmbeddingError(KeyError):
    pass


class RetryableEmbeddingError(EmbeddingError):
    """Transient remote failure (timeout, 5xx); safe to retry."""


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """dot(a, b) / (|a| |b|), clipped into [-1, 1] against float drift."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine undefined for a zero vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


class FileBackedStore:
    """Exact lookup from a TSV file: "key<TAB>v1 v2 ... vd" per line."""

    def __init__(self, path: str | Path):
        self._vectors: dict[str, np.ndarray] = {}
        dim = None
        for lineno, line in enumerate(
                Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            try:
                key, values = line.split("\t", 1)
                vec = np.array([float(v) for v in values.split()])
            except ValueError as e:
                raise ValueError(f"{path}: line {lineno}: bad embedding row") from e
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise ValueError(f"{path}: line {lineno}: dimension {vec.size} != {dim}")
            self._vectors[key] = vec
        self.dim = dim or 0

    def embed(self, text: str) -> np.ndarray:
        text = text.strip()
        if not text:
            raise ValueError("cannot embed empty text")
        if text not in self._vectors:
            raise EmbeddingError(f"unknown key {text!r}")
        return self._vectors[text]


class HashedNgramStore:
    """Deterministic character-3-gram hashing into d buckets, L2-normalized.

    Uses blake2b (stable across processes, unlike the builtin hash) for both
    the bucket index and a sign bit, the usual hashing trick.
    """

    def __init__(self, dim: int = DEFAULT_DIM):
        if dim <= 0:
            raise ValueError("dimension must be positive")
        self.dim = dim
        self._cache: dict[str, np.ndarray] = {}

    def _grams(self, text: str) -> list[str]:
        if len(text) < 3:
            return [text]
        return [text[i:i + 3] for i in range(len(text) - 2)]

    def embed(self, text: str) -> np.ndarray:
        text = text.strip().lower()
        if not text:
            raise ValueError("cannot embed empty text")
        if text in self._cache:
            return self._cache[text]
        vec = np.zeros(self.dim)
        for gram in self._grams(text):
            digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
            value = int.from_bytes(digest, "big")
            bucket = value % self.dim
            sign = 1.0 if (value >> 63) & 1 else -1.0
            vec[bucket] += sign
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            # All grams cancelled; nudge a deterministic bucket so the vector
            # stays usable in cosine.
            vec[0] = 1.0
            norm = 1.0
        vec = vec / norm
        self._cache[text] = vec
        return vec


class RemoteStore:
    """HTTP encoder: POST {url}/embed {"texts": [...]} -> {"vectors": [[...]]}.

    Responses are cached on disk keyed by (provider id, text hash) so a run
    can be reproduced offline.
    """

    def __init__(self, url: str | None = None, cache_dir: str | Path | None = None,
                 timeout: float = 10.0, provider_id: str = "remote-v1"):
        self.url = url or os.environ.get(EMBED_URL_ENV)
        if not self.url:
            raise ValueError(f"no embedding endpoint: pass url or set {EMBED_URL_ENV}")
        self.timeout = timeout
        self.provider_id = provider_id
        self.cache_dir = Path(cache_dir) if cache_dir else None
        if self.cache_dir:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    def _cache_path(self, text: str) -> Path | None:
        if not self.cache_dir:
            return None
        h = hashlib.sha256(text.encode("utf-8")).hexdigest()
        return self.cache_dir / f"{self.provider_id}-{h}.json"

    def embed(self, text: str) -> np.ndarray:
        import requests

        text = text.strip()
        if not text:
            raise ValueError("cannot embed empty text")
        cpath = self._cache_path(text)
        if cpath is not None and cpath.exists():
            return np.array(json.loads(cpath.read_text(encoding="utf-8")))
        try:
            resp = requests.post(f"{self.url.rstrip('/')}/embed",
                                 json={"texts": [text]}, timeout=self.timeout)
        except requests.Timeout as e:
            raise RetryableEmbeddingError(f"embedding request timed out: {e}") from e
        except requests.ConnectionError as e:
            raise RetryableEmbeddingError(f"embedding endpoint unreachable: {e}") from e
        if resp.status_code >= 500:
            raise RetryableEmbeddingError(f"embedding endpoint error {resp.status_code}")
        if resp.status_code != 200:
            raise EmbeddingError(f"embedding request failed: {resp.status_code}")
        vec = np.array(resp.json()["vectors"][0], dtype=float)
        if cpath is not None:
            with self._write_lock:
                cpath.write_text(json.dumps(vec.tolist()), encoding="utf-8")
        return vec


def write_embedding_file(vectors: dict[str, np.ndarray], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for key, vec in vectors.items():
            fh.write(key + "\t" + " ".join(repr(float(v)) for v in vec) + "\n")
