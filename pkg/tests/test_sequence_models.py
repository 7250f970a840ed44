"""Token indexing, batching, and the four sequence architectures."""

import numpy as np
import pytest

from misinfo.errors import DataError
from misinfo.features import EmbeddingTable
from misinfo.sequence_models import (CLS, PAD, UNK, EpochRecord,
                                     SequenceModelConfig, TokenIndex,
                                     build_model, build_token_index,
                                     embedding_matrix, history_rows, pad_batch,
                                     train_sequence_model)

from conftest import separable_corpus, token_pairs

SMALL = dict(embedding_dim=16, hidden=24, kernel_widths=(2, 3), filters=12,
             attention_dim=12, dropout=0.1, max_len=32)


def small_config(arch, **kw):
    return SequenceModelConfig(arch=arch, **{**SMALL, **kw})


def training_pairs():
    return token_pairs(separable_corpus(16, seed=7))


# ------------------------------------------------------------ token index


def test_build_token_index_ordering():
    index = build_token_index([["b", "a", "b"], ["c", "b"]])
    # ids are assigned lexicographically over the kept tokens, after reserved
    assert index.ids == {"a": 3, "b": 4, "c": 5}
    assert index.size == 6


def test_build_token_index_cap_prefers_frequent_then_lex():
    seqs = [["b", "b", "z", "a"]]
    index = build_token_index(seqs, max_size=2)
    assert set(index.ids) == {"a", "b"}  # b by count, then a < z lexicographically
    with pytest.raises(ValueError):
        build_token_index(seqs, max_size=0)


def test_token_index_reserved_ids():
    with pytest.raises(ValueError):
        TokenIndex({"x": PAD})
    roundtrip = TokenIndex.from_dict(TokenIndex({"a": 3, "b": 4}).to_dict())
    assert roundtrip.ids == {"a": 3, "b": 4}


def test_encode_truncates_and_handles_empty():
    index = TokenIndex({"a": 3})
    assert index.encode(["a", "zzz", "a"], max_len=8) == [3, UNK, 3]
    assert index.encode(["a"] * 10, max_len=4) == [3, 3, 3, 3]
    assert index.encode([], max_len=4) == [UNK]
    assert index.encode([], max_len=4, add_cls=True) == [CLS, UNK]
    assert index.encode(["a"] * 10, max_len=4, add_cls=True) == [CLS, 3, 3, 3]


def test_pad_batch():
    ids, mask = pad_batch([[3, 4], [5]], min_len=4)
    assert ids.shape == (2, 4)
    assert ids[1, 1] == PAD
    assert mask.tolist() == [[True, True, False, False], [True, False, False, False]]


# ---------------------------------------------------------------- config


def test_config_validation():
    with pytest.raises(ValueError):
        SequenceModelConfig(arch="gru")
    with pytest.raises(ValueError):
        SequenceModelConfig(arch="cnn", dropout=1.0)
    with pytest.raises(ValueError):
        SequenceModelConfig(arch="cnn", kernel_widths=())
    config = small_config("bilstm_attn")
    assert SequenceModelConfig.from_dict(config.to_dict()) == config


def test_embedding_matrix_seeds_from_table():
    index = TokenIndex({"covid": 3, "hoax": 4})
    table = EmbeddingTable({"covid": np.array([1.0, 2.0], dtype=np.float32)}, 2)
    mat = embedding_matrix(index, 2, np.random.default_rng(0), table)
    assert np.array_equal(mat[PAD], [0.0, 0.0])
    assert np.array_equal(mat[3], [1.0, 2.0])
    assert not np.array_equal(mat[4], [0.0, 0.0])  # random init for the rest
    with pytest.raises(DataError):
        embedding_matrix(index, 3, np.random.default_rng(0), table)


# -------------------------------------------------------------- training


@pytest.mark.parametrize("arch", ["lstm", "bilstm_attn", "cnn", "cnn_bilstm"])
def test_architectures_fit_synthetic_corpus(arch):
    pairs = training_pairs()
    index = build_token_index([seq for seq, _ in pairs])
    model = build_model(small_config(arch), index)
    train_sequence_model(model, pairs, epochs=30, batch=8, lr=5e-3, seed=0,
                         patience=30)
    probs = model.predict_proba([seq for seq, _ in pairs])
    preds = ["fake" if p[0] >= p[1] else "real" for p in probs]
    assert preds == [label for _, label in pairs]
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-9)


def test_prediction_invariant_to_batch_layout():
    pairs = training_pairs()
    index = build_token_index([seq for seq, _ in pairs])
    model = build_model(small_config("lstm"), index)
    seqs = [seq for seq, _ in pairs]
    whole = model.predict_proba(seqs, batch=64)
    # different batch compositions pad rows to different widths
    chunked = np.concatenate([model.predict_proba(seqs[i:i + 3], batch=3)
                              for i in range(0, len(seqs), 3)])
    assert np.array_equal(whole, chunked)


def test_cnn_handles_sequences_shorter_than_kernel():
    index = TokenIndex({"a": 3})
    model = build_model(small_config("cnn", kernel_widths=(3, 4)), index)
    probs = model.predict_proba([["a"], ["a", "a"]])
    assert probs.shape == (2, 2)
    assert np.all(np.isfinite(probs))


def test_training_is_deterministic():
    pairs = training_pairs()
    index = build_token_index([seq for seq, _ in pairs])

    def run():
        model = build_model(small_config("cnn", seed=11), index)
        train_sequence_model(model, pairs, epochs=3, batch=8, seed=11)
        return model

    a, b = run(), run()
    for (_, pa), (_, pb) in zip(a.named_parameters(), b.named_parameters()):
        assert np.array_equal(pa.data, pb.data)


def test_early_stopping_and_history():
    pairs = training_pairs()
    index = build_token_index([seq for seq, _ in pairs])
    model = build_model(small_config("cnn"), index)
    history = train_sequence_model(model, pairs, epochs=40, batch=8, lr=5e-3,
                                   seed=0, patience=2)
    assert len(history) < 40  # saturates and stops early
    assert all(isinstance(rec, EpochRecord) for rec in history)
    text = history_rows(history)
    assert text.startswith("epoch\ttrain_loss\tvalid_f1\n")
    assert len(text.strip().splitlines()) == len(history) + 1


def test_validation_monitor_used_for_early_stop():
    pairs = training_pairs()
    valid = token_pairs(separable_corpus(4, seed=99, split="valid"))
    index = build_token_index([seq for seq, _ in pairs])
    model = build_model(small_config("cnn"), index)
    history = train_sequence_model(model, pairs, valid, epochs=4, batch=8, seed=0)
    assert all(0.0 <= rec.valid_f1 <= 1.0 for rec in history)


def test_frozen_embeddings_excluded_from_updates():
    pairs = training_pairs()
    index = build_token_index([seq for seq, _ in pairs])
    model = build_model(small_config("cnn", freeze_embeddings=True), index)
    before = model.embedding.W.data.copy()
    train_sequence_model(model, pairs, epochs=2, batch=8, seed=0)
    assert np.array_equal(model.embedding.W.data, before)
    assert len(model.trainable_parameters()) == len(model.parameters()) - 1


def test_train_rejects_bad_data():
    index = TokenIndex({"a": 3})
    model = build_model(small_config("lstm"), index)
    with pytest.raises(DataError):
        train_sequence_model(model, [])
    with pytest.raises(DataError):
        train_sequence_model(model, [(["a"], "fake")])
