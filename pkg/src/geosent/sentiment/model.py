"""Attention pooling, classifier heads and ensemble classification."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError
from .encoder import HashedEmbeddingEncoder, TokenEncoder, encode
from .labels import DATASETS, N_CLASSES, SentimentLabel, argmax_label, majority_vote


def softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    ez = np.exp(z - z.max())
    return ez / ez.sum()


def attention_pool(h: np.ndarray, w_att: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pool token vectors into one text vector.

    Scores each token by ``w_att . h_t``, softmax-normalizes the scores into
    weights ``e`` and returns ``(sum_t e_t h_t, e)``.
    """
    h = np.asarray(h, dtype=np.float64)
    w_att = np.asarray(w_att, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] < 1:
        raise ArgumentError(f"token matrix must be (T, d) with T >= 1, got {h.shape}")
    if w_att.shape != (h.shape[1],):
        raise ArgumentError(f"w_att has shape {w_att.shape}, tokens have d={h.shape[1]}")
    e = softmax(h @ w_att)
    return e @ h, e


@dataclass
class ClassifierHead:
    W: np.ndarray  # (3, d)
    b: np.ndarray  # (3,)
    trained_on: str

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.W.ndim != 2 or self.W.shape[0] != N_CLASSES:
            raise ArgumentError(f"head weight must be ({N_CLASSES}, d), got {self.W.shape}")
        if self.b.shape != (N_CLASSES,):
            raise ArgumentError(f"head bias must have shape ({N_CLASSES},), got {self.b.shape}")

    @classmethod
    def zeros(cls, dim: int, trained_on: str) -> "ClassifierHead":
        return cls(np.zeros((N_CLASSES, dim)), np.zeros(N_CLASSES), trained_on)

    def copy(self) -> "ClassifierHead":
        return ClassifierHead(self.W.copy(), self.b.copy(), self.trained_on)


def head_scores(H: np.ndarray, head: ClassifierHead) -> np.ndarray:
    """Class probabilities ``softmax(W H + b)``."""
    H = np.asarray(H, dtype=np.float64)
    if H.shape != (head.W.shape[1],):
        raise ArgumentError(f"pooled vector has shape {H.shape}, head expects ({head.W.shape[1]},)")
    return softmax(head.W @ H + head.b)


@dataclass
class SentimentModel:
    encoder: TokenEncoder
    w_att: np.ndarray
    heads: list[ClassifierHead] = field(default_factory=list)

    def __post_init__(self):
        self.w_att = np.asarray(self.w_att, dtype=np.float64)
        d = self.encoder.dim
        if self.w_att.shape != (d,):
            raise ArgumentError(f"w_att has shape {self.w_att.shape}, encoder dim is {d}")
        if len(self.heads) != 3:
            raise ArgumentError(f"model needs exactly 3 heads, got {len(self.heads)}")
        for hd in self.heads:
            if hd.W.shape[1] != d:
                raise ArgumentError(f"head {hd.trained_on!r} has dim {hd.W.shape[1]}, encoder dim is {d}")

    @classmethod
    def initial(cls, dim: int = 64, table_size: int = 1 << 16, seed: int = 0,
                datasets: tuple[str, ...] = DATASETS) -> "SentimentModel":
        """Random embeddings, zero attention and zero heads."""
        enc = HashedEmbeddingEncoder.random(dim, table_size, seed)
        return cls(enc, np.zeros(dim), [ClassifierHead.zeros(dim, ds) for ds in datasets])

    @property
    def dim(self) -> int:
        return self.encoder.dim

    def head_index(self, dataset: str) -> int:
        for i, hd in enumerate(self.heads):
            if hd.trained_on == dataset:
                return i
        raise ArgumentError(f"no head is trained on dataset {dataset!r}")

    def copy(self) -> "SentimentModel":
        enc = self.encoder.copy() if hasattr(self.encoder, "copy") else self.encoder
        return SentimentModel(enc, self.w_att.copy(), [hd.copy() for hd in self.heads])

    def probabilities(self, text: str) -> list[np.ndarray]:
        H, _ = attention_pool(encode(self.encoder, text), self.w_att)
        return [head_scores(H, hd) for hd in self.heads]


def classify(model: SentimentModel, text: str) -> tuple[tuple[SentimentLabel, ...], SentimentLabel]:
    """Per-head labels and their majority vote for ``text``."""
    per_head = tuple(argmax_label(p) for p in model.probabilities(text))
    return per_head, majority_vote(per_head)
