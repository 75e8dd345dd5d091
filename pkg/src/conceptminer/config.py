"""Flat key=value run configuration.

The config file is plain text, one ``key = value`` per line, ``#`` comments.
Every key is documented in docs/config.md; unknown keys are rejected so typos
fail loudly.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, fields, replace

from .errors import ConfigError

_TRUE = {"true", "1", "yes", "on"}
_FALSE = {"false", "0", "no", "off"}


@dataclass(frozen=True)
class RunConfig:
    # paths
    corpus: str = ""
    parses: str = ""
    embeddings: str = ""
    features: str = ""
    out: str = "run"
    # corpus handling
    null_labels: tuple[str, ...] = ("none",)
    merge_annotators: bool = False
    # matching
    token_boundary: bool = True
    # extraction
    max_fragment_tokens: int = 7
    # grouping
    lam: float = 1.0
    alpha: float = 1.0
    text_metric: str = "cosine"
    linkage: str = "average"
    cut_threshold: float = 0.45
    embed_dim: int = 768
    min_count: int = 3
    # pruning
    gamma: float = 0.9
    retain_informative: bool = True
    # model
    n_features: int = 64
    hidden: int = 32
    attn_dim: int = 16
    beta: float = 1.0
    lr: float = 1e-3
    epochs: int = 30
    batch_size: int = 32
    eval_fraction: float = 0.0
    seed: int = 0
    # ablations
    word_level: bool = False
    skip_grouping: bool = False
    skip_pruning: bool = False

    def validate(self) -> "RunConfig":
        if not self.corpus:
            raise ConfigError("config needs a corpus path")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.lam < 0 or self.alpha <= 0:
            raise ConfigError("lambda must be >= 0 and alpha > 0")
        if self.text_metric not in ("cosine", "manhattan"):
            raise ConfigError(f"unknown text_metric {self.text_metric!r}")
        if self.linkage not in ("average", "complete", "single"):
            raise ConfigError(f"unknown linkage {self.linkage!r}")
        if self.min_count < 1:
            raise ConfigError("min_count must be >= 1")
        if self.max_fragment_tokens < 1:
            raise ConfigError("max_fragment_tokens must be >= 1")
        if not 0.0 <= self.eval_fraction < 1.0:
            raise ConfigError("eval_fraction must be in [0, 1)")
        if self.beta <= 0 or self.lr <= 0 or self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("model hyperparameters outside their domains")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
# config-file key -> dataclass field (lambda is a keyword in python)
_KEY_ALIASES = {"lambda": "lam"}


def _parse_value(field_name: str, raw: str):
    default = getattr(RunConfig(), field_name)
    if isinstance(default, bool):
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ConfigError(f"{field_name}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, tuple):
        return tuple(s.strip() for s in raw.split(",") if s.strip())
    return raw


# input paths resolve against the config file's directory, so a bundled
# config works from any working directory; `out` stays cwd-relative
_INPUT_PATH_FIELDS = ("corpus", "parses", "embeddings", "features")


def load_config(path) -> RunConfig:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: line {lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in line.split("=", 1))
            field_name = _KEY_ALIASES.get(key, key)
            if field_name not in _FIELD_TYPES:
                raise ConfigError(f"{path}: line {lineno}: unknown key {key!r}")
            try:
                values[field_name] = _parse_value(field_name, raw)
            except ValueError as exc:
                raise ConfigError(f"{path}: line {lineno}: {exc}") from exc
    base = os.path.dirname(os.path.abspath(path))
    for field_name in _INPUT_PATH_FIELDS:
        value = values.get(field_name)
        if value and not os.path.isabs(value):
            values[field_name] = os.path.normpath(os.path.join(base, value))
    return RunConfig(**values).validate()


def apply_overrides(config: RunConfig, **overrides) -> RunConfig:
    provided = {k: v for k, v in overrides.items() if v is not None}
    return replace(config, **provided).validate() if provided else config.validate()


def config_hash(config: RunConfig) -> str:
    lines = []
    for f in sorted(fields(RunConfig), key=lambda f: f.name):
        if f.name == "out":  # where a run lands does not change what it computes
            continue
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            value = ",".join(value)
        lines.append(f"{f.name}={value}")
    return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()
