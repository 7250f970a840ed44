"""Vocabulary building, TF-IDF vectors, embedding tables, weighted averaging."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from misinfo.errors import DataError
from misinfo.features import (EmbeddingTable, VectorizerConfig, Vocabulary,
                              average_embeddings, build_vocabulary,
                              concat_sparse, load_embeddings, tfidf_matrix,
                              tfidf_union_vector, tfidf_vector,
                              weighted_average_embedding)

WORD1 = VectorizerConfig("word", 1, 1, 1000)

token_lists = st.lists(
    st.lists(st.sampled_from(["a", "b", "c", "d", "e"]), min_size=1, max_size=6),
    min_size=1, max_size=8)


def test_build_vocabulary_hand_counts():
    vocab = build_vocabulary([["a", "b"], ["b", "c"]], WORD1)
    assert vocab.total_documents == 2
    assert vocab.doc_freq == {"a": 1, "b": 2, "c": 1}
    assert vocab.index == {"a": 0, "b": 1, "c": 2}  # lexicographic ids


def test_build_vocabulary_caps_by_document_frequency():
    vocab = build_vocabulary([["a", "b"], ["b", "c"]],
                             VectorizerConfig("word", 1, 1, 1))
    assert set(vocab.index) == {"b"}


def test_build_vocabulary_tie_break_lexicographic():
    vocab = build_vocabulary([["b", "a"], ["c", "d"]],
                             VectorizerConfig("word", 1, 1, 2))
    assert set(vocab.index) == {"a", "b"}


def test_build_vocabulary_rejects_empty():
    with pytest.raises(ValueError):
        build_vocabulary([], WORD1)
    with pytest.raises(ValueError):
        build_vocabulary([[]], WORD1)  # documents but no features


def test_word_ngrams_and_char_ngrams():
    bigrams = build_vocabulary([["a", "b", "c"]], VectorizerConfig("word", 2, 2, 10))
    assert set(bigrams.index) == {"a b", "b c"}
    chars = build_vocabulary([["abc"]], VectorizerConfig("char", 2, 3, 10))
    assert set(chars.index) == {"ab", "bc", "abc"}


def test_idf_values():
    vocab = build_vocabulary([["covid", "hoax"], ["covid"], ["cases"]], WORD1)
    # df(covid)=2 of 3 docs: ln((1+3)/(1+2)) + 1
    assert vocab.idf("covid") == pytest.approx(math.log(4 / 3) + 1, abs=1e-12)
    assert vocab.idf("cases") == pytest.approx(math.log(2) + 1, abs=1e-12)


def test_tfidf_vector_hand_case():
    docs = [["news", "news", "covid"], ["covid", "cases"], ["cases", "vote"]]
    vocab = build_vocabulary(docs, WORD1)
    vec = tfidf_vector(docs[0], vocab)
    # raw weights: news 2*(ln2+1), covid 1*(ln(4/3)+1), then L2 normalization
    w_news = 2 * (math.log(2) + 1)
    w_covid = math.log(4 / 3) + 1
    norm = math.hypot(w_news, w_covid)
    dense = vec.to_dense()
    assert dense[vocab.index["news"]] == pytest.approx(w_news / norm, abs=1e-12)
    assert dense[vocab.index["covid"]] == pytest.approx(w_covid / norm, abs=1e-12)
    assert vec.norm() == pytest.approx(1.0, abs=1e-12)


def test_tfidf_out_of_vocabulary_is_zero():
    vocab = build_vocabulary([["a"]], WORD1)
    vec = tfidf_vector(["zzz"], vocab)
    assert vec.norm() == 0.0 and len(vec.indices) == 0


@given(token_lists)
def test_tfidf_unit_norm_and_support(docs):
    vocab = build_vocabulary(docs, WORD1)
    for doc in docs:
        vec = tfidf_vector(doc, vocab)
        in_vocab = {tok for tok in doc if tok in vocab.index}
        assert {int(i) for i in vec.indices} == {vocab.index[t] for t in in_vocab}
        if in_vocab:
            assert vec.norm() == pytest.approx(1.0, abs=1e-9)


@given(token_lists)
def test_build_vocabulary_deterministic(docs):
    a = build_vocabulary(docs, WORD1)
    b = build_vocabulary(docs, WORD1)
    assert a.index == b.index and a.doc_freq == b.doc_freq


def test_vocabulary_roundtrip():
    vocab = build_vocabulary([["a", "b"], ["b"]], WORD1)
    again = Vocabulary.from_dict(vocab.to_dict())
    assert again.index == vocab.index
    assert again.doc_freq == vocab.doc_freq
    assert again.config == vocab.config


def test_concat_and_union_vector():
    docs = [["ab", "cd"], ["ab"]]
    word = build_vocabulary(docs, WORD1)
    char = build_vocabulary(docs, VectorizerConfig("char", 2, 2, 10))
    vec = tfidf_union_vector(docs[0], [word, char])
    assert vec.dimension == word.size + char.size
    parts = [tfidf_vector(docs[0], word), tfidf_vector(docs[0], char)]
    assert np.allclose(vec.to_dense(),
                       np.concatenate([p.to_dense() for p in parts]))
    assert concat_sparse(parts).dimension == vec.dimension


def test_tfidf_matrix_matches_vectors():
    docs = [["a", "b"], ["b", "c"], ["c"]]
    vocab = build_vocabulary(docs, WORD1)
    mat = tfidf_matrix(docs, [vocab])
    dense = mat.toarray()
    for i, doc in enumerate(docs):
        assert np.allclose(dense[i], tfidf_vector(doc, vocab).to_dense())


# ------------------------------------------------------------- embeddings


def test_load_embeddings(tmp_path):
    path = tmp_path / "vecs.txt"
    path.write_text("a 1.0 0.0\nb 0.0 2.0\n")
    table = load_embeddings(path)
    assert table.dim == 2 and "a" in table and "zzz" not in table
    assert np.allclose(table.get("b"), [0.0, 2.0])


def test_load_embeddings_errors(tmp_path):
    bad_dim = tmp_path / "dim.txt"
    bad_dim.write_text("a 1.0 0.0\nb 1.0\n")
    with pytest.raises(DataError, match=":2"):
        load_embeddings(bad_dim)
    bad_num = tmp_path / "num.txt"
    bad_num.write_text("a 1.0 x\n")
    with pytest.raises(DataError, match=":1"):
        load_embeddings(bad_num)
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    with pytest.raises(DataError):
        load_embeddings(empty)
    assert load_embeddings(empty, expected_dim=3).dim == 3


def test_load_embeddings_duplicate_keeps_first(tmp_path):
    path = tmp_path / "dup.txt"
    path.write_text("a 1.0\na 9.0\n")
    assert load_embeddings(path).get("a")[0] == 1.0


def test_average_embeddings_hand_case():
    table = EmbeddingTable({"t1": np.array([1.0, 0.0]), "t2": np.array([0.0, 2.0])}, 2)
    out = average_embeddings(["t1", "t2"], [0.5, 1.0], table)
    assert np.allclose(out, [0.25, 1.0], atol=1e-12)


def test_average_embeddings_edge_cases():
    table = EmbeddingTable({"t": np.array([2.0, -1.0])}, 2)
    assert np.array_equal(average_embeddings(["x", "y"], [1.0, 1.0], table),
                          np.zeros(2))
    # single token: weight w times embedding e (N=1)
    assert np.allclose(average_embeddings(["t"], [0.3], table), [0.6, -0.3],
                       atol=1e-12)
    assert np.array_equal(average_embeddings([], [], table), np.zeros(2))


def test_average_embeddings_linear_in_table_scale():
    table = EmbeddingTable({"a": np.array([1.0, 2.0]), "b": np.array([3.0, -1.0])}, 2)
    base = average_embeddings(["a", "b", "c"], [0.2, 0.7, 0.4], table)
    # power-of-two scale keeps every float operation exact
    doubled = average_embeddings(["a", "b", "c"], [0.2, 0.7, 0.4], table.scale(2.0))
    assert np.array_equal(doubled, 2.0 * base)
    scaled = average_embeddings(["a", "b", "c"], [0.2, 0.7, 0.4], table.scale(2.5))
    assert np.allclose(scaled, 2.5 * base, rtol=1e-15)


def test_weighted_average_embedding_uses_tfidf_weights():
    docs = [["covid", "hoax"], ["covid"], ["cases"]]
    vocab = build_vocabulary(docs, WORD1)
    table = EmbeddingTable({"covid": np.array([1.0, 0.0]),
                            "hoax": np.array([0.0, 1.0])}, 2)
    doc = ["covid", "hoax", "oov"]
    weights = tfidf_vector(doc, vocab).to_dense()
    expected = (weights[vocab.index["covid"]] * np.array([1.0, 0.0])
                + weights[vocab.index["hoax"]] * np.array([0.0, 1.0])) / 3
    assert np.allclose(weighted_average_embedding(doc, vocab, table), expected,
                       atol=1e-12)


def test_weighted_average_embedding_average_over_known():
    docs = [["covid", "hoax"], ["covid"], ["cases"]]
    vocab = build_vocabulary(docs, WORD1)
    table = EmbeddingTable({"covid": np.array([1.0, 0.0])}, 2)
    doc = ["covid", "oov", "oov", "oov"]
    by_total = weighted_average_embedding(doc, vocab, table)
    by_known = weighted_average_embedding(doc, vocab, table,
                                          average_over_known=True)
    assert np.allclose(by_known, 4.0 * by_total, atol=1e-12)


def test_weighted_average_embedding_requires_unigram_vocab():
    docs = [["a", "b"]]
    bigram = build_vocabulary(docs, VectorizerConfig("word", 2, 2, 10))
    table = EmbeddingTable({"a": np.array([1.0])}, 1)
    with pytest.raises(ValueError):
        weighted_average_embedding(["a", "b"], bigram, table)


def test_embedding_dim_validation():
    with pytest.raises(ValueError):
        EmbeddingTable({"a": np.array([1.0, 2.0])}, 3)
