"""Flat INI run configuration with typed fields and strict key checking.

Sections: ``[pipeline]``, ``[features]``, ``[model]``, ``[paths]``. Every key
maps to one RunConfig field; unknown sections or keys fail loudly so typos
cannot silently fall back to defaults. Command-line flags override file
values after loading.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .preprocess import PipelineConfig

LINEAR_MODELS = ("logreg", "svm_hinge", "pac")
SEQUENCE_MODELS = ("lstm", "bilstm_attn", "cnn", "cnn_bilstm")
ENCODER_MODELS = ("standard", "shared_layers", "relative_position")
ALL_MODELS = LINEAR_MODELS + ("mlp",) + SEQUENCE_MODELS + ENCODER_MODELS


@dataclass
class RunConfig:
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    # features
    feature_mode: str = "tfidf"  # tfidf | weighted_embedding (vector models)
    word_ngram_max: int = 2
    char_ngram_min: int = 2
    char_ngram_max: int = 3
    word_max_features: int = 100_000
    char_max_features: int = 100_000
    use_char: bool = True
    average_over_known: bool = False
    token_vocab_size: int = 50_000
    # model + training (None = per-kind default)
    model: str = "pac"
    epochs: Optional[int] = None
    lr: Optional[float] = None
    batch: Optional[int] = None
    C: float = 1.0
    hidden: tuple = (256,)
    seed: int = 0
    patience: int = 3
    embedding_dim: int = 100
    hidden_size: int = 128
    dropout: Optional[float] = None
    max_len: int = 128
    layers: int = 2
    heads: int = 4
    d_model: int = 64
    d_ffn: int = 256
    clip_distance: int = 8
    freeze_embeddings: bool = False
    tie_label: str = "fake"
    top_terms: int = 20
    # paths
    train_path: Optional[str] = None
    valid_path: Optional[str] = None
    embeddings_path: Optional[str] = None
    stopwords_path: Optional[str] = None

    def __post_init__(self):
        if self.model not in ALL_MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {ALL_MODELS}")
        if self.feature_mode not in ("tfidf", "weighted_embedding"):
            raise ConfigError(f"unknown feature mode {self.feature_mode!r}")
        if self.tie_label not in ("fake", "real"):
            raise ConfigError(f"tie_label must be fake or real, not {self.tie_label!r}")


def _parse_hidden(raw: str) -> tuple:
    try:
        sizes = tuple(int(part) for part in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"bad hidden sizes {raw!r}") from exc
    if not sizes:
        raise ConfigError("hidden sizes must be non-empty")
    return sizes


_BOOL = {"true": True, "yes": True, "1": True, "on": True,
         "false": False, "no": False, "0": False, "off": False}

# section -> key -> (field name, parser)
_SCHEMA = {
    "pipeline": {
        "convert_emoticons": ("pipeline.convert_emoticons", "bool"),
        "split_hashtags": ("pipeline.split_hashtags", "bool"),
        "stem": ("pipeline.stem", "bool"),
        "clean": ("pipeline.clean", "bool"),
        "keep_hashtag_digits": ("pipeline.keep_hashtag_digits", "bool"),
    },
    "features": {
        "mode": ("feature_mode", "str"),
        "word_ngram_max": ("word_ngram_max", "int"),
        "char_ngram_min": ("char_ngram_min", "int"),
        "char_ngram_max": ("char_ngram_max", "int"),
        "word_max_features": ("word_max_features", "int"),
        "char_max_features": ("char_max_features", "int"),
        "use_char": ("use_char", "bool"),
        "average_over_known": ("average_over_known", "bool"),
        "token_vocab_size": ("token_vocab_size", "int"),
    },
    "model": {
        "kind": ("model", "str"),
        "epochs": ("epochs", "int"),
        "lr": ("lr", "float"),
        "batch": ("batch", "int"),
        "c": ("C", "float"),
        "hidden": ("hidden", "hidden"),
        "seed": ("seed", "int"),
        "patience": ("patience", "int"),
        "embedding_dim": ("embedding_dim", "int"),
        "hidden_size": ("hidden_size", "int"),
        "dropout": ("dropout", "float"),
        "max_len": ("max_len", "int"),
        "layers": ("layers", "int"),
        "heads": ("heads", "int"),
        "d_model": ("d_model", "int"),
        "d_ffn": ("d_ffn", "int"),
        "clip_distance": ("clip_distance", "int"),
        "freeze_embeddings": ("freeze_embeddings", "bool"),
        "tie_label": ("tie_label", "str"),
        "top_terms": ("top_terms", "int"),
    },
    "paths": {
        "train": ("train_path", "str"),
        "valid": ("valid_path", "str"),
        "embeddings": ("embeddings_path", "str"),
        "stopwords": ("stopwords_path", "str"),
    },
}


def _convert(raw: str, kind: str, where: str):
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            if raw.lower() not in _BOOL:
                raise ValueError(raw)
            return _BOOL[raw.lower()]
        if kind == "hidden":
            return _parse_hidden(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {kind}") from exc


def load_config(path: Optional[str] = None) -> RunConfig:
    """Defaults when path is None; otherwise strict INI parsing."""
    if path is None:
        return RunConfig()
    file = Path(path)
    if not file.exists():
        raise ConfigError(f"config file not found: {file}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(file.read_text(encoding="utf-8"), source=str(file))
    except configparser.Error as exc:
        raise ConfigError(f"{file}: {exc}") from exc
    values: dict = {}
    pipeline_values: dict = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{file}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{file}: unknown key {key!r} in [{section}]")
            target, kind = _SCHEMA[section][key]
            value = _convert(raw, kind, f"{file} [{section}] {key}")
            if target.startswith("pipeline."):
                pipeline_values[target.split(".", 1)[1]] = value
            else:
                values[target] = value
    config = RunConfig(pipeline=PipelineConfig(**pipeline_values), **values)
    return config


def override(config: RunConfig, **updates) -> RunConfig:
    """Non-None keyword updates replace the corresponding fields."""
    known = {f.name for f in fields(RunConfig)}
    cleaned = {}
    for key, value in updates.items():
        if key not in known:
            raise ConfigError(f"unknown config field {key!r}")
        if value is not None:
            cleaned[key] = value
    return replace(config, **cleaned) if cleaned else config
