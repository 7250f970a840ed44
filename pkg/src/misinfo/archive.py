"""Self-describing single-file model persistence.

Container layout (all integers little-endian):

    magic b"MISA" | version u32 | sections...
    section: name_len u32 | name utf-8 | payload_len u64 | payload

Section "meta" holds a canonical JSON document (sorted keys, no timestamps);
section "params" holds named float32 frames. Models keep float32 weights
natively, so save → load reproduces predictions bit-for-bit and repeated
saves of the same model are byte-identical.

Archives for weighted-embedding feature mode embed the slice of the
embedding table their vocabulary can ever touch, so they stay self-contained
without shipping the full pretrained file.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .classifiers import LinearModel, MlpModel, predict_proba
from .corpus import Corpus
from .errors import DataError
from .features import (EmbeddingTable, Vocabulary, tfidf_union_vector,
                       weighted_average_embedding)
from .preprocess import PipelineConfig, preprocess_corpus
from .sequence_models import (EpochRecord, SequenceModelConfig, TokenIndex,
                              build_model)
from .transformer import EncoderConfig, build_encoder

MAGIC = b"MISA"
VERSION = 1

KINDS = ("linear", "mlp", "sequence", "encoder")


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def write_sections(sections: dict) -> bytes:
    out = io.BytesIO()
    out.write(MAGIC)
    out.write(struct.pack("<I", VERSION))
    for name, payload in sections.items():
        encoded = name.encode("utf-8")
        out.write(struct.pack("<I", len(encoded)))
        out.write(encoded)
        out.write(struct.pack("<Q", len(payload)))
        out.write(payload)
    return out.getvalue()


def read_sections(blob: bytes, source: str = "archive") -> dict:
    if blob[:4] != MAGIC:
        raise DataError(f"{source}: not a model archive (bad magic)")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != VERSION:
        raise DataError(f"{source}: unsupported archive version {version}")
    sections = {}
    offset = 8
    while offset < len(blob):
        (name_len,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        name = blob[offset : offset + name_len].decode("utf-8")
        offset += name_len
        (payload_len,) = struct.unpack_from("<Q", blob, offset)
        offset += 8
        if offset + payload_len > len(blob):
            raise DataError(f"{source}: truncated section {name!r}")
        sections[name] = blob[offset : offset + payload_len]
        offset += payload_len
    return sections


def pack_params(named: Sequence[tuple]) -> bytes:
    out = io.BytesIO()
    out.write(struct.pack("<I", len(named)))
    for name, arr in named:
        arr = np.ascontiguousarray(arr, dtype="<f4")
        encoded = name.encode("utf-8")
        out.write(struct.pack("<I", len(encoded)))
        out.write(encoded)
        out.write(struct.pack("<I", arr.ndim))
        out.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        out.write(arr.tobytes())
    return out.getvalue()


def unpack_params(blob: bytes, source: str = "archive") -> dict:
    (count,) = struct.unpack_from("<I", blob, 0)
    offset = 4
    frames = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        name = blob[offset : offset + name_len].decode("utf-8")
        offset += name_len
        (ndim,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        shape = struct.unpack_from(f"<{ndim}I", blob, offset)
        offset += 4 * ndim
        size = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(blob, dtype="<f4", count=size, offset=offset)
        offset += 4 * size
        frames[name] = arr.reshape(shape).astype(np.float32)
    if offset != len(blob):
        raise DataError(f"{source}: trailing bytes in params section")
    return frames


@dataclass
class TrainedModel:
    """A classifier plus everything needed to run it on raw text."""

    kind: str
    model: object
    pipeline: PipelineConfig
    feature: dict
    history: Optional[list] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")

    def _vectorize(self, token_seqs):
        mode = self.feature["mode"]
        if mode == "tfidf":
            return [tfidf_union_vector(seq, self.feature["vocabs"]) for seq in token_seqs]
        if mode == "weighted_embedding":
            return [
                weighted_average_embedding(
                    seq, self.feature["vocab"], self.feature["table"],
                    average_over_known=self.feature.get("average_over_known", False))
                for seq in token_seqs
            ]
        raise ValueError(f"unknown feature mode {mode!r}")

    def predict_proba_seqs(self, token_seqs: Sequence) -> np.ndarray:
        """(P(fake), P(real)) rows for preprocessed token sequences."""
        if self.kind in ("sequence", "encoder"):
            return self.model.predict_proba(token_seqs)
        vectors = self._vectorize(token_seqs)
        return np.stack([predict_proba(self.model, x) for x in vectors]) \
            if vectors else np.zeros((0, 2))

    def predict_proba_corpus(self, corpus: Corpus) -> np.ndarray:
        return self.predict_proba_seqs(preprocess_corpus(corpus, self.pipeline))


def _feature_meta(feature: dict) -> dict:
    mode = feature["mode"]
    if mode == "tfidf":
        return {"mode": mode, "vocabs": [v.to_dict() for v in feature["vocabs"]]}
    if mode == "weighted_embedding":
        table: EmbeddingTable = feature["table"]
        tokens = sorted(feature["vocab"].index)
        kept = [t for t in tokens if t in table]
        return {
            "mode": mode,
            "vocab": feature["vocab"].to_dict(),
            "table_tokens": kept,
            "dim": table.dim,
            "average_over_known": feature.get("average_over_known", False),
        }
    if mode == "tokens":
        return {"mode": mode}
    raise ValueError(f"unknown feature mode {mode!r}")


def _model_meta_and_params(trained: TrainedModel) -> tuple:
    model = trained.model
    if trained.kind == "linear":
        meta = {"linear_kind": model.kind, "bias": model.bias,
                "feature_mode": model.feature_mode}
        frames = [("weights", model.weights)]
    elif trained.kind == "mlp":
        meta = {"dim": model.dim, "hidden": list(model.hidden),
                "feature_mode": model.feature_mode}
        frames = [(name, p.data) for name, p in model.named_parameters()]
    elif trained.kind == "sequence":
        meta = {"config": model.config.to_dict(), "index": model.index.to_dict()}
        frames = [(name, p.data) for name, p in model.named_parameters()]
    else:  # encoder
        meta = {"config": model.config.to_dict(), "index": model.index.to_dict()}
        frames = [(name, p.data) for name, p in model.named_parameters()]
    return meta, frames


def save_model(path: Union[str, Path], trained: TrainedModel) -> None:
    model_meta, frames = _model_meta_and_params(trained)
    feature_meta = _feature_meta(trained.feature)
    if feature_meta["mode"] == "weighted_embedding":
        table: EmbeddingTable = trained.feature["table"]
        rows = np.stack([table.get(t) for t in feature_meta["table_tokens"]]) \
            if feature_meta["table_tokens"] else np.zeros((0, table.dim), np.float32)
        frames = frames + [("embedding_table", rows)]
    meta = {
        "kind": trained.kind,
        "pipeline": trained.pipeline.to_dict(),
        "feature": feature_meta,
        "model": model_meta,
        "history": [[r.epoch, r.train_loss, r.valid_f1] for r in trained.history or []],
    }
    blob = write_sections({
        "meta": _canonical_json(meta),
        "params": pack_params(frames),
    })
    Path(path).write_bytes(blob)


def _restore_params(module, frames: dict, source: str):
    for name, param in module.named_parameters():
        if name not in frames:
            raise DataError(f"{source}: missing parameter {name!r}")
        arr = frames[name]
        if arr.shape != param.data.shape:
            raise DataError(
                f"{source}: parameter {name!r} has shape {arr.shape}, "
                f"expected {param.data.shape}")
        param.data = arr


def load_model(path: Union[str, Path]) -> TrainedModel:
    path = Path(path)
    if not path.exists():
        raise DataError(f"model archive not found: {path}")
    sections = read_sections(path.read_bytes(), source=str(path))
    for required in ("meta", "params"):
        if required not in sections:
            raise DataError(f"{path}: archive lacks section {required!r}")
    meta = json.loads(sections["meta"].decode("utf-8"))
    frames = unpack_params(sections["params"], source=str(path))
    kind = meta["kind"]
    pipeline = PipelineConfig.from_dict(meta["pipeline"])
    fmeta = meta["feature"]
    if fmeta["mode"] == "tfidf":
        feature = {"mode": "tfidf",
                   "vocabs": [Vocabulary.from_dict(v) for v in fmeta["vocabs"]]}
    elif fmeta["mode"] == "weighted_embedding":
        rows = frames.pop("embedding_table")
        table = EmbeddingTable(dict(zip(fmeta["table_tokens"], rows)), fmeta["dim"])
        feature = {"mode": "weighted_embedding",
                   "vocab": Vocabulary.from_dict(fmeta["vocab"]),
                   "table": table,
                   "average_over_known": fmeta["average_over_known"]}
    elif fmeta["mode"] == "tokens":
        feature = {"mode": "tokens"}
    else:
        raise DataError(f"{path}: unknown feature mode {fmeta['mode']!r}")
    mmeta = meta["model"]
    if kind == "linear":
        model = LinearModel(mmeta["linear_kind"], frames["weights"],
                            mmeta["bias"], mmeta["feature_mode"])
    elif kind == "mlp":
        model = MlpModel(mmeta["dim"], mmeta["hidden"], np.random.default_rng(0),
                         mmeta["feature_mode"])
        _restore_params(model, frames, str(path))
    elif kind == "sequence":
        model = build_model(SequenceModelConfig.from_dict(mmeta["config"]),
                            TokenIndex.from_dict(mmeta["index"]))
        _restore_params(model, frames, str(path))
        model.eval_mode()
    elif kind == "encoder":
        model = build_encoder(EncoderConfig.from_dict(mmeta["config"]),
                              TokenIndex.from_dict(mmeta["index"]))
        _restore_params(model, frames, str(path))
        model.eval_mode()
    else:
        raise DataError(f"{path}: unknown model kind {kind!r}")
    history = [EpochRecord(int(e), loss, f1) for e, loss, f1 in meta.get("history", [])]
    return TrainedModel(kind, model, pipeline, feature, history or None)
