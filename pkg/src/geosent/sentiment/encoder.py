"""Token encoders: text -> (T, d) matrix of token representations.

Any object with an integer ``dim`` and an ``encode(text)`` method returning a
finite ``(T, dim)`` float array can serve as the encoder. The in-repo
reference, :class:`HashedEmbeddingEncoder`, looks each token up in a
trainable table at ``fnv1a_64(token) % table_size``.
"""

from __future__ import annotations

import re
from functools import lru_cache
from typing import Protocol, runtime_checkable

import numpy as np

from ..errors import ArgumentError, EmptyInputError

_TOKEN = re.compile(r"\w+|[^\w\s]")

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1


@runtime_checkable
class TokenEncoder(Protocol):
    dim: int

    def encode(self, text: str) -> np.ndarray: ...


def tokenize(text: str) -> list[str]:
    """Case-folded word runs and single punctuation marks."""
    return _TOKEN.findall(text.casefold())


@lru_cache(maxsize=1 << 16)
def fnv1a_64(token: str) -> int:
    """64-bit FNV-1a over the UTF-8 bytes of ``token``."""
    h = FNV_OFFSET
    for byte in token.encode("utf-8"):
        h ^= byte
        h = (h * FNV_PRIME) & _MASK
    return h


class HashedEmbeddingEncoder:
    """Trainable hashed-embedding encoder.

    Tokens are independent: a token's row depends only on the token, never on
    its neighbours. Colliding tokens share a row.
    """

    def __init__(self, table: np.ndarray) -> None:
        table = np.asarray(table, dtype=np.float64)
        if table.ndim != 2 or table.shape[0] < 1 or table.shape[1] < 1:
            raise ArgumentError(f"embedding table must be 2-D and non-empty, got shape {table.shape}")
        self.table = table

    @classmethod
    def random(cls, dim: int = 64, table_size: int = 1 << 16, seed: int = 0,
               scale: float = 0.1) -> "HashedEmbeddingEncoder":
        rng = np.random.default_rng(seed)
        return cls(rng.normal(0.0, scale, size=(table_size, dim)))

    @property
    def dim(self) -> int:
        return self.table.shape[1]

    @property
    def table_size(self) -> int:
        return self.table.shape[0]

    def token_ids(self, text: str) -> np.ndarray:
        toks = tokenize(text)
        if not toks:
            raise EmptyInputError(f"no tokens in {text!r}")
        n = self.table_size
        return np.fromiter((fnv1a_64(t) % n for t in toks), dtype=np.int64, count=len(toks))

    def encode(self, text: str) -> np.ndarray:
        return self.table[self.token_ids(text)]

    def copy(self) -> "HashedEmbeddingEncoder":
        return HashedEmbeddingEncoder(self.table.copy())


def encode(encoder: TokenEncoder, text: str) -> np.ndarray:
    h = np.asarray(encoder.encode(text), dtype=np.float64)
    if h.ndim != 2 or h.shape[0] == 0:
        raise EmptyInputError(f"encoder produced no tokens for {text!r}")
    return h
