"""Mini-batch gradient descent for the pooled ensemble, and gradient checking.

For one example with token rows ``h`` (T x d), gold class ``y`` and head
``(W, b)``::

    a = h @ w_att            e = softmax(a)         H = e @ h
    z = W @ H + b            p = softmax(z)         loss = -log p[y]

Backward::

    dz = p - onehot(y)       dW = outer(dz, H)      db = dz
    dH = W.T @ dz            g = h @ dH             da = e * (g - e . g)
    dw_att = da @ h          dh = outer(e, dH) + outer(da, w_att)

``dh`` is scattered into the embedding rows the tokens were read from.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import IO, Iterable, NamedTuple, Sequence

import numpy as np

from ..errors import ArgumentError, FormatError
from .encoder import encode
from .labels import N_CLASSES, SentimentLabel, argmax_label, harmonize_labels, majority_vote
from .model import SentimentModel, softmax

log = logging.getLogger(__name__)


class LabeledExample(NamedTuple):
    text: str
    label: SentimentLabel
    dataset: str


@dataclass(frozen=True)
class Hyperparams:
    lr: float = 0.0005
    batch_size: int = 32
    epochs: int = 12
    seed: int = 0

    def __post_init__(self):
        if not self.lr > 0:
            raise ArgumentError(f"learning rate must be positive, got {self.lr}")
        if self.batch_size < 1 or self.epochs < 1:
            raise ArgumentError("batch_size and epochs must be >= 1")


@dataclass
class EpochStats:
    epoch: int
    loss: dict[str, float]  # per head dataset
    accuracy: dict[str, float]  # per head dataset, plus "ensemble"


@dataclass
class Gradients:
    w_att: np.ndarray
    W: list[np.ndarray]
    b: list[np.ndarray]
    rows: dict[int, np.ndarray] = field(default_factory=dict)  # embedding row -> grad


def _trainable_table(model: SentimentModel):
    enc = model.encoder
    return enc.table if hasattr(enc, "table") and hasattr(enc, "token_ids") else None


def _tokens(model: SentimentModel, text: str):
    """``(row ids or None, token matrix)`` for ``text``."""
    if _trainable_table(model) is not None:
        ids = model.encoder.token_ids(text)
        return ids, model.encoder.table[ids]
    return None, encode(model.encoder, text)


def example_loss(model: SentimentModel, ex: LabeledExample, head: int | None = None) -> float:
    if head is None:
        head = model.head_index(ex.dataset)
    _, h = _tokens(model, ex.text)
    a = h @ model.w_att
    e = softmax(a)
    H = e @ h
    hd = model.heads[head]
    z = hd.W @ H + hd.b
    zmax = z.max()
    return float(zmax + np.log(np.exp(z - zmax).sum()) - z[ex.label])


def batch_loss(model: SentimentModel, batch: Sequence[LabeledExample]) -> float:
    return sum(example_loss(model, ex) for ex in batch) / len(batch)


def batch_gradients(model: SentimentModel, batch: Sequence[LabeledExample]) -> tuple[float, Gradients]:
    """Mean cross-entropy over ``batch`` and its gradient.

    Each example is scored by the head trained on its dataset. Contributions
    are summed in batch order, so results are reproducible bit for bit.
    """
    if not batch:
        raise ArgumentError("empty batch")
    d = model.dim
    g = Gradients(np.zeros(d), [np.zeros_like(hd.W) for hd in model.heads],
                  [np.zeros(N_CLASSES) for _ in model.heads])
    w = model.w_att
    total = 0.0
    row_ids, row_grads = [], []
    for ex in batch:
        k = model.head_index(ex.dataset)
        hd = model.heads[k]
        ids, h = _tokens(model, ex.text)
        e = softmax(h @ w)
        H = e @ h
        z = hd.W @ H + hd.b
        p = softmax(z)
        zmax = z.max()
        total += float(zmax + np.log(np.exp(z - zmax).sum()) - z[ex.label])

        dz = p.copy()
        dz[ex.label] -= 1.0
        g.W[k] += np.outer(dz, H)
        g.b[k] += dz
        dH = hd.W.T @ dz
        gt = h @ dH
        da = e * (gt - e @ gt)
        g.w_att += da @ h
        if ids is not None:
            row_ids.append(ids)
            row_grads.append(np.outer(e, dH) + np.outer(da, w))

    n = len(batch)
    g.w_att /= n
    for k in range(len(model.heads)):
        g.W[k] /= n
        g.b[k] /= n
    if row_ids:
        ids = np.concatenate(row_ids)
        grads = np.concatenate(row_grads)
        uniq, inv = np.unique(ids, return_inverse=True)
        acc = np.zeros((len(uniq), d))
        np.add.at(acc, inv, grads)
        acc /= n
        g.rows = {int(r): acc[i] for i, r in enumerate(uniq)}
    return total / n, g


def _apply(model: SentimentModel, g: Gradients, lr: float) -> None:
    model.w_att -= lr * g.w_att
    for k, hd in enumerate(model.heads):
        hd.W -= lr * g.W[k]
        hd.b -= lr * g.b[k]
    table = _trainable_table(model)
    if table is not None and g.rows:
        rows = np.fromiter(g.rows.keys(), dtype=np.int64, count=len(g.rows))
        table[rows] -= lr * np.stack(list(g.rows.values()))


def evaluate(model: SentimentModel, examples: Sequence[LabeledExample]) -> tuple[dict, dict]:
    """Per-head mean loss/accuracy on each head's own data, plus ensemble accuracy."""
    loss: dict[str, float] = {}
    acc: dict[str, float] = {}
    ens_correct = 0
    per_head: dict[int, list] = {}
    for ex in examples:
        probs = model.probabilities(ex.text)
        labels = [argmax_label(p) for p in probs]
        ens_correct += majority_vote(labels) == ex.label
        k = model.head_index(ex.dataset)
        per_head.setdefault(k, []).append((-np.log(max(probs[k][ex.label], 1e-300)), labels[k] == ex.label))
    for k, vals in sorted(per_head.items()):
        name = model.heads[k].trained_on
        loss[name] = float(np.mean([v[0] for v in vals]))
        acc[name] = float(np.mean([v[1] for v in vals]))
    acc["ensemble"] = ens_correct / len(examples) if examples else float("nan")
    return loss, acc


def train(model: SentimentModel, examples: Sequence[LabeledExample],
          hp: Hyperparams = Hyperparams()) -> tuple[SentimentModel, list[EpochStats]]:
    """Train a copy of ``model``; returns it with per-epoch loss/accuracy.

    Every head sees only its own dataset. Each epoch shuffles every head's
    examples, cuts them into batches and visits all batches of all heads in
    one shuffled order; embeddings and ``w_att`` are shared and updated by
    every step. All shuffling draws from one generator seeded by ``hp.seed``.
    """
    model = model.copy()
    by_head: list[list[LabeledExample]] = [[] for _ in model.heads]
    for ex in examples:
        by_head[model.head_index(ex.dataset)].append(ex)
    for hd, exs in zip(model.heads, by_head):
        if not exs:
            raise ArgumentError(f"head {hd.trained_on!r} has no training examples")

    rng = np.random.default_rng(hp.seed)
    trace = []
    for epoch in range(1, hp.epochs + 1):
        batches = []
        for exs in by_head:
            perm = rng.permutation(len(exs))
            for s in range(0, len(exs), hp.batch_size):
                batches.append([exs[i] for i in perm[s:s + hp.batch_size]])
        for bi in rng.permutation(len(batches)):
            _, g = batch_gradients(model, batches[bi])
            _apply(model, g, hp.lr)
        loss, acc = evaluate(model, examples)
        trace.append(EpochStats(epoch, loss, acc))
        log.info("epoch %d loss %s ensemble acc %.4f", epoch,
                 " ".join(f"{k}={v:.4f}" for k, v in loss.items()), acc["ensemble"])
    return model, trace


# --- gradient checking ------------------------------------------------------

def _flatten(g: Gradients, rows: list[int]) -> np.ndarray:
    parts = [g.w_att.ravel()]
    parts += [w.ravel() for w in g.W]
    parts += [b.ravel() for b in g.b]
    parts += [g.rows[r] for r in rows]
    return np.concatenate(parts)


def _param_views(model: SentimentModel, rows: list[int]) -> list[np.ndarray]:
    views = [model.w_att]
    views += [hd.W for hd in model.heads]
    views += [hd.b for hd in model.heads]
    table = _trainable_table(model)
    if table is not None:
        views += [table[r] for r in rows]  # basic indexing: writable views
    return views


def analytic_gradient(model: SentimentModel, batch: Sequence[LabeledExample]) -> tuple[np.ndarray, list[int]]:
    _, g = batch_gradients(model, batch)
    rows = sorted(g.rows)
    return _flatten(g, rows), rows


def numeric_gradient(model: SentimentModel, batch: Sequence[LabeledExample], rows: list[int],
                     step: float = 1e-5) -> np.ndarray:
    """Central differences of the batch loss over every checked parameter.

    Parameters are perturbed in place and restored exactly afterwards.
    """
    out = []
    for view in _param_views(model, rows):
        flat = view.reshape(-1)  # a view, since all parameters are contiguous
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = batch_loss(model, batch)
            flat[i] = orig - step
            down = batch_loss(model, batch)
            flat[i] = orig
            out.append((up - down) / (2 * step))
    return np.asarray(out)


def relative_errors(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> np.ndarray:
    """``|a - n| / max(|a|, |n|, floor)`` elementwise.

    The floor keeps vanishing gradients (both sides ~0) from turning
    round-off into huge ratios.
    """
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / denom


def grad_check(model: SentimentModel, batch: Sequence[LabeledExample], step: float = 1e-5) -> float:
    """Max relative error between backprop and central-difference gradients.

    Covers ``w_att``, every head's ``W`` and ``b``, and the embedding rows the
    batch touches.
    """
    if not batch:
        raise ArgumentError("grad_check needs a non-empty batch")
    a, rows = analytic_gradient(model, batch)
    n = numeric_gradient(model, batch, rows, step)
    return float(relative_errors(a, n).max())


# --- training data ------------------------------------------------------------

def read_training_tsv(src: IO[str], name: str = "<training data>") -> list[LabeledExample]:
    """Read ``dataset_id<TAB>raw_label<TAB>text`` rows; a header row is optional."""
    out = []
    reader = csv.reader(src, delimiter="\t", quoting=csv.QUOTE_NONE)
    for lineno, row in enumerate(reader, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if lineno == 1 and [c.strip().lower() for c in row[:2]] == ["dataset", "label"]:
            continue
        if len(row) < 3:
            raise FormatError("expected dataset<TAB>label<TAB>text", name, f"line {lineno}")
        dataset, raw, text = row[0].strip(), row[1], "\t".join(row[2:])
        try:
            label = harmonize_labels(raw, dataset)
        except FormatError as exc:
            raise FormatError(str(exc), name, f"line {lineno}") from None
        if not text.strip():
            raise FormatError("empty text", name, f"line {lineno}")
        out.append(LabeledExample(text, label, dataset))
    return out


def datasets_of(examples: Iterable[LabeledExample]) -> list[str]:
    return sorted({ex.dataset for ex in examples})
