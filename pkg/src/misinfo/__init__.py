"""Fake-news text classification toolkit.

From-scratch pipeline: tweet preprocessing, TF-IDF and weighted-embedding
features, a small reverse-mode autodiff core, linear / MLP / recurrent /
convolutional / transformer classifiers, probability-averaging ensembles,
and an evaluation harness with delimited reports and figures.
"""

from .archive import TrainedModel, load_model, save_model
from .classifiers import (LinearModel, MlpModel, pa_update, predict_label,
                          predict_proba, train_linear, train_mlp)
from .config import ALL_MODELS, RunConfig, load_config, override
from .corpus import (CLASS_ORDER, FAKE, LABELS, REAL, Corpus, LabeledRecord,
                     class_stats, frequent_terms, load_dataset, load_stopwords,
                     save_dataset)
from .ensemble import (Metrics, average_probs, ensemble_predict, evaluate,
                       format_metrics_table, format_report,
                       misclassification_report, predicted_label)
from .errors import ConfigError, DataError, MisinfoError
from .features import (EmbeddingTable, SparseVector, VectorizerConfig,
                       Vocabulary, average_embeddings, build_vocabulary,
                       load_embeddings, tfidf_matrix, tfidf_union_vector,
                       tfidf_vector, weighted_average_embedding)
from .preprocess import (PipelineConfig, TokenSequence, clean,
                         convert_emoticons, preprocess_corpus,
                         preprocess_pipeline, split_hashtag, stem, tokenize)
from .sequence_models import (SequenceModel, SequenceModelConfig, TokenIndex,
                              build_model, build_token_index,
                              train_sequence_model)
from .transformer import (EncoderConfig, EncoderModel, build_encoder,
                          encode_classify, train_encoder)

__version__ = "0.1.0"

__all__ = [
    "ALL_MODELS", "CLASS_ORDER", "ConfigError", "Corpus", "DataError",
    "EmbeddingTable", "EncoderConfig", "EncoderModel", "FAKE", "LABELS",
    "LabeledRecord", "LinearModel", "Metrics", "MisinfoError", "MlpModel",
    "PipelineConfig", "REAL", "RunConfig", "SequenceModel",
    "SequenceModelConfig", "SparseVector", "TokenIndex", "TokenSequence",
    "TrainedModel", "VectorizerConfig", "Vocabulary", "average_embeddings",
    "average_probs", "build_encoder", "build_model", "build_token_index",
    "build_vocabulary", "class_stats", "clean", "convert_emoticons",
    "encode_classify", "ensemble_predict", "evaluate", "format_metrics_table",
    "format_report", "frequent_terms", "load_config", "load_dataset",
    "load_embeddings", "load_model", "load_stopwords",
    "misclassification_report", "override", "pa_update", "predict_label",
    "predict_proba", "predicted_label", "preprocess_corpus",
    "preprocess_pipeline", "save_dataset", "save_model", "split_hashtag",
    "stem", "tfidf_matrix", "tfidf_union_vector", "tfidf_vector", "tokenize",
    "train_encoder", "train_linear", "train_mlp", "train_sequence_model",
    "weighted_average_embedding",
]
