"""Dataset loading, validation, stats and frequent-term ranking."""

import pytest

from misinfo.corpus import (Corpus, LabeledRecord, class_stats, frequent_terms,
                            load_dataset, load_stopwords, save_dataset)
from misinfo.errors import DataError

from conftest import separable_corpus, write_tsv


def test_roundtrip_labeled(tmp_path):
    corpus = separable_corpus(4)
    path = write_tsv(tmp_path / "d.tsv", corpus)
    loaded = load_dataset(path)
    assert [r.id for r in loaded] == [r.id for r in corpus]
    assert loaded.labels() == corpus.labels()
    save_dataset(loaded, tmp_path / "copy.tsv")
    assert (tmp_path / "copy.tsv").read_text() == path.read_text()


def test_unlabeled_roundtrip(tmp_path):
    path = tmp_path / "u.tsv"
    path.write_text("id\ttweet\na\thello there\nb\tmore text\n")
    corpus = load_dataset(path, expect_labels=False)
    assert len(corpus) == 2 and not corpus.labeled
    with pytest.raises(DataError):
        corpus.labels()
    with pytest.raises(DataError):
        load_dataset(path)  # labels required by default


def test_header_and_row_validation(tmp_path):
    cases = {
        "bad_header.tsv": "tweet\tid\tlabel\nx\ty\treal\n",
        "bad_label.tsv": "id\ttweet\tlabel\na\ttext\tbogus\n",
        "bad_cols.tsv": "id\ttweet\tlabel\na\ttext\n",
        "dup_id.tsv": "id\ttweet\tlabel\na\tx\treal\na\ty\tfake\n",
        "empty.tsv": "",
    }
    for name, content in cases.items():
        path = tmp_path / name
        path.write_text(content)
        with pytest.raises(DataError):
            load_dataset(path, expect_labels=False)
    with pytest.raises(DataError, match="not found"):
        load_dataset(tmp_path / "nope.tsv")


def test_error_reports_line_number(tmp_path):
    path = tmp_path / "d.tsv"
    path.write_text("id\ttweet\tlabel\na\tx\treal\nb\ty\tmaybe\n")
    with pytest.raises(DataError, match=r":3"):
        load_dataset(path)


def test_labels_parsed_case_insensitively(tmp_path):
    path = tmp_path / "d.tsv"
    path.write_text("id\ttweet\tlabel\na\tx\tREAL\nb\ty\tFake\n")
    assert load_dataset(path).labels() == ["real", "fake"]


def test_class_stats():
    corpus = separable_corpus(5)
    assert class_stats(corpus) == {"real": 5, "fake": 5}


def test_record_validation():
    with pytest.raises(DataError):
        LabeledRecord("", "text")
    with pytest.raises(DataError):
        LabeledRecord("a", "")
    with pytest.raises(DataError):
        LabeledRecord("a", "text", "unknown")
    with pytest.raises(DataError):
        Corpus((LabeledRecord("a", "x"), LabeledRecord("a", "y")))


def test_frequent_terms_ranking():
    seqs = [["covid", "hoax", "hoax"], ["cure", "covid"], ["cases", "covid"]]
    labels = ["fake", "fake", "real"]
    top = frequent_terms(seqs, labels, "fake", 3)
    assert top == [("covid", 2), ("hoax", 2), ("cure", 1)]  # count desc, ties lex
    assert frequent_terms(seqs, labels, "real", 5) == [("cases", 1), ("covid", 1)]
    assert frequent_terms(seqs, labels, "fake", 2, stopwords=["covid"]) == [
        ("hoax", 2), ("cure", 1)]
    with pytest.raises(DataError):
        frequent_terms(seqs, labels[:2], "fake", 3)
    with pytest.raises(DataError):
        frequent_terms(seqs, labels, "bogus", 3)


def test_default_stopwords():
    stops = load_stopwords()
    assert {"the", "a", "is"} <= stops
    assert "covid" not in stops


def test_custom_stopwords(tmp_path):
    path = tmp_path / "stops.txt"
    path.write_text("# comment\nfoo\nbar\n\n")
    assert load_stopwords(path) == {"foo", "bar"}
    with pytest.raises(DataError):
        load_stopwords(tmp_path / "missing.txt")
