"""INI run-configuration parsing, validation and overrides."""

import pytest

from misinfo.config import (ALL_MODELS, ENCODER_MODELS, LINEAR_MODELS,
                            SEQUENCE_MODELS, RunConfig, load_config, override)
from misinfo.errors import ConfigError


def test_defaults():
    config = load_config(None)
    assert config.model == "pac"
    assert config.feature_mode == "tfidf"
    assert config.tie_label == "fake"
    assert config.seed == 0
    assert config.epochs is None  # per-kind default applies at train time
    assert config.pipeline.stem and config.pipeline.clean


def test_model_name_groups():
    assert set(LINEAR_MODELS) <= set(ALL_MODELS)
    assert set(SEQUENCE_MODELS) <= set(ALL_MODELS)
    assert set(ENCODER_MODELS) <= set(ALL_MODELS)
    assert "mlp" in ALL_MODELS
    assert len(set(ALL_MODELS)) == len(ALL_MODELS)


def test_full_ini_roundtrip(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(
        "[pipeline]\n"
        "stem = false\n"
        "keep_hashtag_digits = true\n"
        "[features]\n"
        "mode = weighted_embedding\n"
        "word_ngram_max = 3\n"
        "use_char = false\n"
        "[model]\n"
        "kind = bilstm_attn\n"
        "epochs = 7\n"
        "lr = 0.005\n"
        "hidden = 64\n"
        "c = 2.0\n"
        "seed = 4\n"
        "tie_label = real\n"
        "[paths]\n"
        "train = data/train.tsv\n"
        "embeddings = vecs.txt\n"
    )
    config = load_config(path)
    assert not config.pipeline.stem
    assert config.pipeline.keep_hashtag_digits
    assert config.feature_mode == "weighted_embedding"
    assert config.word_ngram_max == 3
    assert not config.use_char
    assert config.model == "bilstm_attn"
    assert config.epochs == 7
    assert config.lr == 0.005
    assert config.hidden == (64,)
    assert config.C == 2.0
    assert config.seed == 4
    assert config.tie_label == "real"
    assert config.train_path == "data/train.tsv"
    assert config.embeddings_path == "vecs.txt"


def test_hidden_accepts_comma_list(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[model]\nkind = mlp\nhidden = 128, 64\n")
    assert load_config(path).hidden == (128, 64)


def test_unknown_section_and_key_rejected(tmp_path):
    bad_section = tmp_path / "a.ini"
    bad_section.write_text("[training]\nepochs = 3\n")
    with pytest.raises(ConfigError, match="unknown section"):
        load_config(bad_section)
    bad_key = tmp_path / "b.ini"
    bad_key.write_text("[model]\nlearning_rate = 0.1\n")
    with pytest.raises(ConfigError, match="unknown key"):
        load_config(bad_key)


def test_type_errors_reported(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[model]\nepochs = many\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


def test_validation_of_enums():
    with pytest.raises(ConfigError):
        RunConfig(model="xgboost")
    with pytest.raises(ConfigError):
        RunConfig(feature_mode="bow")
    with pytest.raises(ConfigError):
        RunConfig(tie_label="maybe")


def test_override():
    config = load_config(None)
    updated = override(config, seed=9, embeddings_path=None)
    assert updated.seed == 9
    assert updated.embeddings_path is config.embeddings_path  # None ignored
    assert config.seed == 0  # original untouched
    with pytest.raises(ConfigError):
        override(config, nonsense=1)
