"""Binary model files.

Layout (all integers little-endian unsigned 32-bit, all reals little-endian
IEEE-754 float64)::

    magic        8 bytes  b"GEOSENT\\0"
    version      u32      1
    dim          u32
    table_size   u32      rows of the hashed embedding table
    n_heads      u32
    per head:    u32 byte length + UTF-8 dataset id
    table        table_size * dim reals, row-major
    w_att        dim reals
    per head:    W (3 * dim reals, row-major) then b (3 reals)

Round trips are exact: bytes are copied, never formatted.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import ArgumentError, FormatError
from .encoder import HashedEmbeddingEncoder
from .labels import N_CLASSES
from .model import ClassifierHead, SentimentModel

MAGIC = b"GEOSENT\0"
VERSION = 1
_F8 = np.dtype("<f8")


def dumps_model(model: SentimentModel) -> bytes:
    enc = model.encoder
    if not isinstance(enc, HashedEmbeddingEncoder):
        raise ArgumentError("only models with the hashed-embedding encoder can be saved")
    parts = [MAGIC, struct.pack("<IIII", VERSION, enc.dim, enc.table_size, len(model.heads))]
    for hd in model.heads:
        name = hd.trained_on.encode("utf-8")
        parts.append(struct.pack("<I", len(name)) + name)
    parts.append(enc.table.astype(_F8).tobytes())
    parts.append(model.w_att.astype(_F8).tobytes())
    for hd in model.heads:
        parts.append(hd.W.astype(_F8).tobytes())
        parts.append(hd.b.astype(_F8).tobytes())
    return b"".join(parts)


def loads_model(data: bytes, name: str = "<model>") -> SentimentModel:
    view = memoryview(data)
    pos = 0

    def take(n: int) -> memoryview:
        nonlocal pos
        if pos + n > len(view):
            raise FormatError(f"truncated model file (needed {n} bytes at offset {pos})", name)
        chunk = view[pos:pos + n]
        pos += n
        return chunk

    def reals(count: int) -> np.ndarray:
        return np.frombuffer(take(count * 8), dtype=_F8).astype(np.float64)

    if bytes(take(len(MAGIC))) != MAGIC:
        raise FormatError("not a geosent model file", name)
    version, dim, table_size, n_heads = struct.unpack("<IIII", take(16))
    if version != VERSION:
        raise FormatError(f"unsupported model version {version}", name)
    if dim < 1 or table_size < 1 or n_heads != 3:
        raise FormatError(f"bad header dim={dim} table_size={table_size} heads={n_heads}", name)
    ids = []
    for _ in range(n_heads):
        (ln,) = struct.unpack("<I", take(4))
        ids.append(bytes(take(ln)).decode("utf-8"))
    table = reals(table_size * dim).reshape(table_size, dim)
    w_att = reals(dim)
    heads = []
    for ds in ids:
        W = reals(N_CLASSES * dim).reshape(N_CLASSES, dim)
        heads.append(ClassifierHead(W, reals(N_CLASSES), ds))
    if pos != len(view):
        raise FormatError(f"{len(view) - pos} trailing bytes", name)
    return SentimentModel(HashedEmbeddingEncoder(table), w_att, heads)


def save_model(model: SentimentModel, path) -> None:
    Path(path).write_bytes(dumps_model(model))


def load_model(path) -> SentimentModel:
    p = Path(path)
    return loads_model(p.read_bytes(), str(p))
