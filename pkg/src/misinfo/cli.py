"""Command-line interface.

Subcommands: preprocess, train, predict, evaluate, report-terms. Exit codes:
0 success, 1 usage or configuration error, 2 data error. Informational
messages go to stderr; delimited data rows go to stdout or ``--out`` files.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .archive import TrainedModel, load_model, save_model
from .classifiers import train_linear, train_mlp
from .config import (LINEAR_MODELS, SEQUENCE_MODELS, RunConfig,
                     load_config, override)
from .corpus import (CLASS_ORDER, LABELS, Corpus, class_stats, frequent_terms,
                     load_dataset, load_stopwords)
from .ensemble import (Metrics, average_probs, evaluate, format_metrics_table,
                       format_report, misclassification_report, predicted_label)
from .errors import ConfigError, DataError
from .features import (VectorizerConfig, build_vocabulary, load_embeddings,
                       tfidf_union_vector, weighted_average_embedding)
from .preprocess import preprocess_corpus
from .sequence_models import (SequenceModelConfig, build_token_index, build_model,
                              history_rows, train_sequence_model)
from .transformer import DEFAULT_BATCH, EncoderConfig, build_encoder, train_encoder


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit code 1)."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _info(message: str):
    print(message, file=sys.stderr)


def _require(value, flag: str):
    if value is None:
        raise ConfigError(f"missing required flag {flag}")
    return value


def _config_from(args) -> RunConfig:
    config = load_config(getattr(args, "config", None))
    return override(
        config,
        seed=getattr(args, "seed", None),
        embeddings_path=getattr(args, "embeddings", None),
        stopwords_path=getattr(args, "stopwords", None),
    )


# ---------------------------------------------------------------- training


def _tfidf_vocabs(config: RunConfig, seqs):
    vocabs = [build_vocabulary(seqs, VectorizerConfig(
        "word", 1, config.word_ngram_max, config.word_max_features))]
    if config.use_char:
        vocabs.append(build_vocabulary(seqs, VectorizerConfig(
            "char", config.char_ngram_min, config.char_ngram_max,
            config.char_max_features)))
    return vocabs


def _fit_vector_model(config: RunConfig, seqs, labels) -> TrainedModel:
    if config.feature_mode == "tfidf":
        vocabs = _tfidf_vocabs(config, seqs)
        vectors = [tfidf_union_vector(seq, vocabs) for seq in seqs]
        feature = {"mode": "tfidf", "vocabs": vocabs}
    else:
        path = _require(config.embeddings_path, "--embeddings")
        table = load_embeddings(path)
        vocab = build_vocabulary(seqs, VectorizerConfig(
            "word", 1, 1, config.word_max_features))
        vectors = [weighted_average_embedding(seq, vocab, table,
                                              config.average_over_known)
                   for seq in seqs]
        feature = {"mode": "weighted_embedding", "vocab": vocab, "table": table,
                   "average_over_known": config.average_over_known}
    data = list(zip(vectors, labels))
    if config.model in LINEAR_MODELS:
        model = train_linear(config.model, data,
                             epochs=config.epochs if config.epochs is not None else 20,
                             lr=config.lr if config.lr is not None else 0.1,
                             C=config.C, seed=config.seed,
                             feature_mode=config.feature_mode)
        kind = "linear"
    else:
        model = train_mlp(data, hidden=config.hidden,
                          epochs=config.epochs if config.epochs is not None else 20,
                          lr=config.lr if config.lr is not None else 1e-3,
                          batch=config.batch if config.batch is not None else 64,
                          seed=config.seed, feature_mode=config.feature_mode)
        kind = "mlp"
    return TrainedModel(kind, model, config.pipeline, feature)


def _fit_token_model(config: RunConfig, seqs, labels, valid_pairs) -> TrainedModel:
    index = build_token_index(seqs, config.token_vocab_size)
    data = list(zip(seqs, labels))
    if config.model in SEQUENCE_MODELS:
        table = None
        if config.embeddings_path:
            table = load_embeddings(config.embeddings_path)
            dim = table.dim
        else:
            dim = config.embedding_dim
        model_config = SequenceModelConfig(
            arch=config.model, embedding_dim=dim, hidden=config.hidden_size,
            dropout=config.dropout if config.dropout is not None else 0.25,
            max_len=config.max_len, freeze_embeddings=config.freeze_embeddings,
            seed=config.seed)
        model = build_model(model_config, index, table)
        history = train_sequence_model(
            model, data, valid_pairs,
            epochs=config.epochs if config.epochs is not None else 10,
            batch=config.batch if config.batch is not None else 32,
            lr=config.lr if config.lr is not None else 1e-3,
            seed=config.seed, patience=config.patience)
        return TrainedModel("sequence", model, config.pipeline,
                            {"mode": "tokens"}, history)
    encoder_config = EncoderConfig(
        variant=config.model, layers=config.layers, heads=config.heads,
        d_model=config.d_model, d_ffn=config.d_ffn, max_len=config.max_len,
        dropout=config.dropout if config.dropout is not None else 0.1,
        clip_distance=config.clip_distance, seed=config.seed)
    model = build_encoder(encoder_config, index)
    history = train_encoder(
        model, data, valid_pairs,
        epochs=config.epochs if config.epochs is not None else 10,
        batch=config.batch if config.batch is not None else DEFAULT_BATCH[config.model],
        lr=config.lr if config.lr is not None else 3e-4,
        seed=config.seed, patience=config.patience)
    return TrainedModel("encoder", model, config.pipeline, {"mode": "tokens"}, history)


def cmd_train(args) -> int:
    config = _config_from(args)
    train_path = _require(args.dataset or config.train_path, "--dataset")
    out_path = _require(args.model, "--model")
    corpus = load_dataset(train_path, expect_labels=True, split="train")
    if len(corpus) == 0:
        raise DataError(f"{train_path}: no training records")
    stats = class_stats(corpus)
    _info(f"training {config.model} on {len(corpus)} records "
          f"(real {stats['real']} / fake {stats['fake']}), seed {config.seed}")
    valid_corpus = None
    valid_path = args.valid or config.valid_path
    if valid_path:
        valid_corpus = load_dataset(valid_path, expect_labels=True, split="valid")
    started = time.time()
    seqs = preprocess_corpus(corpus, config.pipeline)
    labels = corpus.labels()
    if config.model in LINEAR_MODELS or config.model == "mlp":
        trained = _fit_vector_model(config, seqs, labels)
    else:
        valid_pairs = None
        if valid_corpus is not None:
            valid_pairs = list(zip(preprocess_corpus(valid_corpus, config.pipeline),
                                   valid_corpus.labels()))
        trained = _fit_token_model(config, seqs, labels, valid_pairs)
    _info(f"trained in {time.time() - started:.1f}s")
    eval_corpus = valid_corpus if valid_corpus is not None else corpus
    eval_name = "valid" if valid_corpus is not None else "train"
    probs = trained.predict_proba_corpus(eval_corpus)
    preds = [predicted_label(p, config.tie_label) for p in probs]
    metrics = evaluate(preds, eval_corpus.labels())
    print(format_metrics_table({f"{config.model}[{eval_name}]": metrics}), end="")
    save_model(out_path, trained)
    _info(f"wrote {out_path}")
    if trained.history:
        base = Path(out_path)
        history_path = base.with_suffix(base.suffix + ".history.tsv")
        history_path.write_text(history_rows(trained.history), encoding="utf-8")
        _info(f"wrote {history_path}")
        if args.figures:
            from .figures import save_history_figure

            figure_path = base.with_suffix(base.suffix + ".history.png")
            save_history_figure(trained.history, figure_path)
            _info(f"wrote {figure_path}")
    return 0


# ---------------------------------------------------------------- inference


def _member_paths(args) -> list[str]:
    if getattr(args, "members", None):
        paths = [p.strip() for p in args.members.split(",") if p.strip()]
        if not paths:
            raise ConfigError("--members lists no archives")
        return paths
    if getattr(args, "model", None):
        return [args.model]
    raise ConfigError("need --model or --members")


def cmd_predict(args) -> int:
    config = _config_from(args)
    paths = _member_paths(args)
    members = [load_model(p) for p in paths]
    corpus = load_dataset(_require(args.dataset, "--dataset"), expect_labels=False)
    per_member = [m.predict_proba_corpus(corpus) for m in members]
    lines = ["id\tlabel\tp_fake"]
    for i, rec in enumerate(corpus.records):
        probs = average_probs([rows[i] for rows in per_member])
        label = predicted_label(probs, config.tie_label)
        lines.append(f"{rec.id}\t{label}\t{float(probs[0])!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        _info(f"wrote {args.out} ({len(corpus)} predictions)")
    else:
        print(text, end="")
    return 0


def _read_predictions(path: str) -> dict:
    file = Path(path)
    if not file.exists():
        raise DataError(f"predictions file not found: {file}")
    lines = file.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split("\t")[:2] != ["id", "label"]:
        raise DataError(f"{file}: expected header starting with id<TAB>label")
    out = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) < 2:
            raise DataError(f"{file}:{lineno}: expected at least 2 columns")
        rec_id, label = cols[0], cols[1].strip().lower()
        if label not in LABELS:
            raise DataError(f"{file}:{lineno}: unknown label {cols[1]!r}")
        if rec_id in out:
            raise DataError(f"{file}:{lineno}: duplicate id {rec_id!r}")
        out[rec_id] = label
    return out


def _align_predictions(preds_by_id: dict, corpus: Corpus) -> list[str]:
    gold_ids = [rec.id for rec in corpus.records]
    missing = [i for i in gold_ids if i not in preds_by_id]
    extra = [i for i in preds_by_id if i not in set(gold_ids)]
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing ids: {', '.join(missing[:5])}"
                         + ("..." if len(missing) > 5 else ""))
        if extra:
            parts.append(f"unexpected ids: {', '.join(extra[:5])}"
                         + ("..." if len(extra) > 5 else ""))
        raise DataError("predictions do not align with gold dataset; " + "; ".join(parts))
    return [preds_by_id[i] for i in gold_ids]


def _confusion_lines(name: str, metrics: Metrics) -> str:
    m = metrics.confusion
    header = f"confusion[{name}] (rows gold, cols pred; order {'/'.join(CLASS_ORDER)})"
    return (f"{header}\n"
            f"  {CLASS_ORDER[0]}\t{m[0, 0]}\t{m[0, 1]}\n"
            f"  {CLASS_ORDER[1]}\t{m[1, 0]}\t{m[1, 1]}")


def cmd_evaluate(args) -> int:
    config = _config_from(args)
    gold = load_dataset(_require(args.dataset, "--dataset"), expect_labels=True)
    if len(gold) == 0:
        raise DataError("gold dataset is empty")
    golds = gold.labels()
    preds_by_model: dict[str, list[str]] = {}
    if args.predictions:
        preds_by_model["predictions"] = _align_predictions(
            _read_predictions(args.predictions), gold)
    else:
        paths = _member_paths(args)
        members = [(Path(p).stem, load_model(p)) for p in paths]
        per_member = []
        for name, member in members:
            probs = member.predict_proba_corpus(gold)
            per_member.append(probs)
            preds_by_model[name] = [predicted_label(p, config.tie_label) for p in probs]
        if len(members) > 1:
            preds_by_model["ensemble"] = [
                predicted_label(average_probs([rows[i] for rows in per_member]),
                                config.tie_label)
                for i in range(len(gold))
            ]
    metrics_by_model = {name: evaluate(preds, golds)
                        for name, preds in preds_by_model.items()}
    table = format_metrics_table(metrics_by_model)
    print(table, end="")
    for name, metrics in metrics_by_model.items():
        print(_confusion_lines(name, metrics))
    report = misclassification_report(gold, preds_by_model)
    _info(f"{len(report)} of {len(gold)} samples misclassified by at least one model")
    if args.out:
        base = args.out[:-4] if args.out.endswith(".tsv") else args.out
        Path(base).parent.mkdir(parents=True, exist_ok=True)
        metrics_path = Path(base + ".metrics.tsv")
        metrics_path.write_text(table, encoding="utf-8")
        report_path = Path(base + ".misclassified.tsv")
        report_path.write_text(format_report(report, list(preds_by_model)),
                               encoding="utf-8")
        written = [metrics_path, report_path]
        if args.figures:
            from .figures import save_confusion_figure, save_metrics_figure

            last = list(metrics_by_model)[-1]
            written.append(save_confusion_figure(metrics_by_model[last],
                                                 Path(base + ".confusion.png")))
            written.append(save_metrics_figure(metrics_by_model,
                                               Path(base + ".scores.png")))
        _info("wrote " + ", ".join(str(p) for p in written))
    return 0


# ------------------------------------------------------------ text reports


def cmd_preprocess(args) -> int:
    config = _config_from(args)
    corpus = load_dataset(_require(args.dataset, "--dataset"), expect_labels=False)
    seqs = preprocess_corpus(corpus, config.pipeline)
    labeled = corpus.labeled and len(corpus) > 0
    lines = ["id\ttokens\tlabel" if labeled else "id\ttokens"]
    for rec, seq in zip(corpus.records, seqs):
        joined = " ".join(seq.tokens)
        lines.append(f"{rec.id}\t{joined}\t{rec.label}" if labeled
                     else f"{rec.id}\t{joined}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        _info(f"wrote {args.out} ({len(corpus)} rows)")
    else:
        print(text, end="")
    return 0


def cmd_report_terms(args) -> int:
    config = _config_from(args)
    corpus = load_dataset(_require(args.dataset, "--dataset"), expect_labels=True)
    if len(corpus) == 0:
        raise DataError("dataset is empty")
    seqs = preprocess_corpus(corpus, config.pipeline)
    stopwords = load_stopwords(config.stopwords_path)
    labels = corpus.labels()
    lines = ["label\trank\ttoken\tcount"]
    for label in LABELS:
        for rank, (token, count) in enumerate(
                frequent_terms(seqs, labels, label, config.top_terms, stopwords),
                start=1):
            lines.append(f"{label}\t{rank}\t{token}\t{count}")
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        _info(f"wrote {args.out}")
    return 0


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="misinfo",
                     description="Fake-news text classification toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, figures: bool = False):
        p.add_argument("--config", help="INI run configuration")
        p.add_argument("--seed", type=int, help="override the run seed")
        p.add_argument("--dataset", help="input dataset TSV")
        p.add_argument("--out", help="output path")
        if figures:
            p.add_argument("--no-figures", dest="figures", action="store_false",
                           help="skip rendering PNG figures")
            p.set_defaults(figures=True)

    p = sub.add_parser("preprocess", help="tokenize a dataset")
    common(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train a model and write an archive")
    common(p, figures=True)
    p.add_argument("--model", help="output model archive path")
    p.add_argument("--valid", help="validation dataset TSV")
    p.add_argument("--embeddings", help="pretrained embedding text file")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write predictions for a dataset")
    common(p)
    p.add_argument("--model", help="model archive")
    p.add_argument("--members", help="comma-separated member archives (ensemble)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions or models against gold")
    common(p, figures=True)
    p.add_argument("--model", help="model archive")
    p.add_argument("--members", help="comma-separated member archives (ensemble)")
    p.add_argument("--predictions", help="existing predictions TSV to score")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report-terms", help="most frequent terms per class")
    common(p)
    p.add_argument("--stopwords", help="custom stopword file")
    p.set_defaults(func=cmd_report_terms)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
