"""Attention-pooled, three-head ensemble sentiment classifier."""

from .encoder import HashedEmbeddingEncoder, TokenEncoder, encode, fnv1a_64, tokenize
from .labels import (
    ARGMAX_TIE_ORDER,
    DATASETS,
    SentimentLabel,
    argmax_label,
    harmonize_labels,
    majority_vote,
)
from .model import ClassifierHead, SentimentModel, attention_pool, classify, head_scores, softmax
from .persist import dumps_model, load_model, loads_model, save_model
from .train import (
    EpochStats,
    Hyperparams,
    LabeledExample,
    batch_gradients,
    grad_check,
    read_training_tsv,
    train,
)

__all__ = [
    "ARGMAX_TIE_ORDER", "DATASETS", "ClassifierHead", "EpochStats", "HashedEmbeddingEncoder",
    "Hyperparams", "LabeledExample", "SentimentLabel", "SentimentModel", "TokenEncoder",
    "argmax_label", "attention_pool", "batch_gradients", "classify", "dumps_model", "encode",
    "fnv1a_64", "grad_check", "harmonize_labels", "head_scores", "load_model", "loads_model",
    "majority_vote", "read_training_tsv", "save_model", "softmax", "tokenize", "train",
]
