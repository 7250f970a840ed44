"""Minimal reverse-mode autodiff core and layer inventory."""

from .gradcheck import gradient_check, relative_error
from .layers import (
    AdditiveAttention, BiLSTM, Conv1D, Dropout, Embedding, EncoderBlock,
    FeedForward, LSTM, LSTMCell, LayerNorm, Linear, Module,
    MultiHeadSelfAttention, glorot, lstm_cell_step, max_over_time,
    scaled_dot_attention,
)
from .optim import adam_step, clip_global_norm, zero_grads
from .tensor import Parameter, Tensor, concat, dropout, softmax_cross_entropy, take

__all__ = [
    "Tensor", "Parameter", "concat", "take", "softmax_cross_entropy", "dropout",
    "Module", "Linear", "Embedding", "LayerNorm", "Dropout",
    "LSTMCell", "lstm_cell_step", "LSTM", "BiLSTM", "AdditiveAttention",
    "Conv1D", "max_over_time", "scaled_dot_attention",
    "MultiHeadSelfAttention", "FeedForward", "EncoderBlock", "glorot",
    "adam_step", "clip_global_norm", "zero_grads",
    "gradient_check", "relative_error",
]
