"""End-to-end command-line workflows in a temp directory."""

import numpy as np
import pytest

from misinfo.cli import main

from conftest import separable_corpus, write_embeddings, write_tsv


@pytest.fixture
def data(tmp_path):
    train = write_tsv(tmp_path / "train.tsv", separable_corpus(12, seed=7))
    test = write_tsv(tmp_path / "test.tsv", separable_corpus(5, seed=21, split="test"))
    unlabeled = tmp_path / "unlabeled.tsv"
    rows = ["id\ttweet"] + [f"{r.id}\t{r.text}"
                            for r in separable_corpus(5, seed=21).records]
    unlabeled.write_text("\n".join(rows) + "\n")
    return tmp_path


def run(args):
    return main([str(a) for a in args])


def test_preprocess_stdout(data, capsys):
    assert run(["preprocess", "--dataset", data / "train.tsv"]) == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0] == "id\ttokens\tlabel"
    assert len(lines) == 25
    assert all(len(line.split("\t")) == 3 for line in lines[1:])


def test_preprocess_unlabeled_omits_label_column(data, capsys):
    assert run(["preprocess", "--dataset", data / "unlabeled.tsv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "id\ttokens"


def test_train_predict_evaluate_roundtrip(data, capsys):
    model = data / "pac.model"
    assert run(["train", "--dataset", data / "train.tsv", "--model", model,
                "--seed", 3]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "model\tprecision\trecall\taccuracy\tf1"
    assert model.exists()

    preds = data / "preds.tsv"
    assert run(["predict", "--model", model, "--dataset", data / "unlabeled.tsv",
                "--out", preds]) == 0
    lines = preds.read_text().strip().splitlines()
    assert lines[0] == "id\tlabel\tp_fake"
    assert len(lines) == 11  # header + one row per record
    for line in lines[1:]:
        _, label, p_fake = line.split("\t")
        assert label in ("fake", "real")
        assert 0.0 <= float(p_fake) <= 1.0

    capsys.readouterr()
    assert run(["evaluate", "--predictions", preds, "--dataset",
                data / "test.tsv", "--no-figures"]) == 0
    out = capsys.readouterr().out
    assert "model\tprecision\trecall\taccuracy\tf1" in out
    assert "confusion[predictions]" in out


def test_evaluate_with_members_writes_reports_and_figures(data, capsys):
    for seed, name in ((1, "a"), (2, "b")):
        assert run(["train", "--dataset", data / "train.tsv",
                    "--model", data / f"{name}.model", "--seed", seed]) == 0
    capsys.readouterr()
    out_base = data / "reports" / "eval"
    assert run(["evaluate", "--members",
                f"{data / 'a.model'},{data / 'b.model'}",
                "--dataset", data / "test.tsv", "--out", out_base]) == 0
    stdout = capsys.readouterr().out
    assert "ensemble" in stdout
    metrics = (data / "reports" / "eval.metrics.tsv").read_text()
    assert metrics.splitlines()[0] == "model\tprecision\trecall\taccuracy\tf1"
    assert len(metrics.strip().splitlines()) == 4  # header + a + b + ensemble
    report = (data / "reports" / "eval.misclassified.tsv").read_text()
    assert report.splitlines()[0] == "id\ttext\tgold\ta\tb\tensemble"
    assert (data / "reports" / "eval.confusion.png").stat().st_size > 0
    assert (data / "reports" / "eval.scores.png").stat().st_size > 0


def test_train_sequence_model_writes_history(data):
    config = data / "run.ini"
    config.write_text("[model]\nkind = cnn\nepochs = 2\nhidden_size = 8\n"
                      "embedding_dim = 8\n")
    model = data / "cnn.model"
    assert run(["train", "--dataset", data / "train.tsv", "--valid",
                data / "test.tsv", "--model", model, "--config", config]) == 0
    assert model.exists()
    history = model.with_suffix(".model.history.tsv")
    assert history.read_text().startswith("epoch\ttrain_loss\tvalid_f1\n")
    assert model.with_suffix(".model.history.png").stat().st_size > 0


def test_weighted_embedding_training_requires_embeddings(data, capsys):
    config = data / "run.ini"
    config.write_text("[features]\nmode = weighted_embedding\n"
                      "[model]\nkind = logreg\n")
    model = data / "we.model"
    assert run(["train", "--dataset", data / "train.tsv", "--model", model,
                "--config", config]) == 1  # no --embeddings: config error
    vecs = write_embeddings(data / "vecs.txt")
    assert run(["train", "--dataset", data / "train.tsv", "--model", model,
                "--config", config, "--embeddings", vecs]) == 0
    assert run(["predict", "--model", model, "--dataset",
                data / "unlabeled.tsv", "--out", data / "p.tsv"]) == 0


def test_ensemble_prediction_is_mean_of_members(data):
    paths = []
    for seed in (1, 2, 3):
        path = data / f"m{seed}.model"
        assert run(["train", "--dataset", data / "train.tsv", "--model", path,
                    "--seed", seed]) == 0
        paths.append(path)
    member_probs = []
    for path in paths:
        out = data / f"p{path.stem}.tsv"
        assert run(["predict", "--model", path, "--dataset",
                    data / "unlabeled.tsv", "--out", out]) == 0
        member_probs.append([float(line.split("\t")[2])
                             for line in out.read_text().strip().splitlines()[1:]])
    combined = data / "ensemble.tsv"
    assert run(["predict", "--members", ",".join(str(p) for p in paths),
                "--dataset", data / "unlabeled.tsv", "--out", combined]) == 0
    ensemble = [float(line.split("\t")[2])
                for line in combined.read_text().strip().splitlines()[1:]]
    hand_mean = np.mean(np.array(member_probs), axis=0)
    assert np.allclose(ensemble, hand_mean, atol=1e-12)


def test_report_terms_output(data, capsys):
    assert run(["report-terms", "--dataset", data / "train.tsv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "label\trank\ttoken\tcount"
    labels = {line.split("\t")[0] for line in lines[1:]}
    assert labels == {"real", "fake"}
    ranks = [int(line.split("\t")[1]) for line in lines[1:] if
             line.split("\t")[0] == "real"]
    assert ranks == sorted(ranks)
    # default stopword list keeps corpus words like these out of the report
    tokens = {line.split("\t")[2] for line in lines[1:]}
    assert "the" not in tokens


def test_determinism_byte_identical_archives(data, capsys):
    first = data / "first.model"
    second = data / "second.model"
    rows = []
    for path in (first, second):
        assert run(["train", "--dataset", data / "train.tsv", "--model", path,
                    "--seed", 11]) == 0
        rows.append(capsys.readouterr().out)
    assert first.read_bytes() == second.read_bytes()
    assert rows[0] == rows[1]


def test_exit_codes(data, capsys, tmp_path):
    assert run(["train", "--dataset", data / "missing.tsv",
                "--model", data / "x.model"]) == 2
    assert run(["train", "--dataset", data / "train.tsv"]) == 1  # no --model
    assert run(["predict", "--dataset", data / "test.tsv"]) == 1  # no model
    bad_config = tmp_path / "bad.ini"
    bad_config.write_text("[model]\nkind = nope\n")
    assert run(["train", "--dataset", data / "train.tsv",
                "--model", data / "x.model", "--config", bad_config]) == 1
    assert main(["definitely-not-a-command"]) == 1


def test_evaluate_misaligned_predictions(data, tmp_path, capsys):
    preds = tmp_path / "preds.tsv"
    preds.write_text("id\tlabel\tp_fake\nwrong_id\tfake\t0.9\n")
    assert run(["evaluate", "--predictions", preds,
                "--dataset", data / "test.tsv", "--no-figures"]) == 2


def test_evaluate_rejects_bad_predictions_file(data, tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("no\theader\nhere\tx\n")
    assert run(["evaluate", "--predictions", bad,
                "--dataset", data / "test.tsv", "--no-figures"]) == 2
