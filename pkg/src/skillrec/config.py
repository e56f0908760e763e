"""Runtime configuration: defaults, TOML/JSON config files, env overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

CONFIG_ENV = "SKILLREC_CONFIG"
PORT_ENV = "SKILLREC_PORT"
DATA_DIR_ENV = "SKILLREC_DATA_DIR"


@dataclass
class Config:
    d_model: int = 24
    mask_rate: float = 0.3
    epochs: int = 20
    lr: float = 0.3
    k: int = 5
    threshold: float = 0.85
    top_n_skills: int = 7
    embedding_dim: int = 768
    seed: int = 0
    port: int = 8080
    data_dir: str = "."
    feedback_compact_every: int = 100

    @classmethod
    def load(cls, path: str | Path | None = None) -> "Config":
        """Priority: explicit path, then $SKILLREC_CONFIG, then defaults; the
        port/data-dir env vars override whatever the file said."""
        cfg = cls()
        path = path or os.environ.get(CONFIG_ENV)
        if path:
            cfg = cls(**{**_as_dict(cfg), **_read_file(Path(path))})
        if os.environ.get(PORT_ENV):
            cfg.port = int(os.environ[PORT_ENV])
        if os.environ.get(DATA_DIR_ENV):
            cfg.data_dir = os.environ[DATA_DIR_ENV]
        return cfg


def _as_dict(cfg: Config) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(cfg)}


def _read_file(path: Path) -> dict:
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    if path.suffix == ".toml":
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    elif path.suffix == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
    else:
        raise ValueError(f"config must be .toml or .json, got {path.suffix!r}")
    known = {f.name for f in fields(Config)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return data
