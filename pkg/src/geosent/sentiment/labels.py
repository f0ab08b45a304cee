"""Sentiment labels, dataset label harmonization and the three-way vote."""

from __future__ import annotations

import enum
import math
from collections import Counter
from typing import Sequence

import numpy as np

from ..errors import ArgumentError, FormatError


class SentimentLabel(enum.IntEnum):
    NEGATIVE = 0
    NEUTRAL = 1
    POSITIVE = 2

    def __str__(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, s: str) -> "SentimentLabel":
        try:
            return cls[s.strip().upper()]
        except KeyError:
            raise FormatError(f"unknown sentiment label {s!r}") from None


N_CLASSES = len(SentimentLabel)

# order in which exactly tied class scores are resolved
ARGMAX_TIE_ORDER = (SentimentLabel.NEUTRAL, SentimentLabel.NEGATIVE, SentimentLabel.POSITIVE)

DATASETS = ("sst", "semeval15-t10", "semeval15-t11")

_T10_NAMES = {
    "negative": SentimentLabel.NEGATIVE,
    "neutral": SentimentLabel.NEUTRAL,
    "objective": SentimentLabel.NEUTRAL,
    "objective-or-neutral": SentimentLabel.NEUTRAL,
    "positive": SentimentLabel.POSITIVE,
}


def argmax_label(probs: Sequence[float] | np.ndarray) -> SentimentLabel:
    """Most probable class; exact ties go Neutral, then Negative, then Positive."""
    best = max(probs)
    for lab in ARGMAX_TIE_ORDER:
        if probs[lab] == best:
            return lab
    raise ArgumentError(f"no maximum in {probs!r}")  # NaN input


def majority_vote(labels: Sequence[SentimentLabel]) -> SentimentLabel:
    """Label chosen by at least two of three voters; Neutral when all differ."""
    if len(labels) != 3:
        raise ArgumentError(f"majority vote needs exactly 3 labels, got {len(labels)}")
    lab, count = Counter(SentimentLabel(x) for x in labels).most_common(1)[0]
    return lab if count >= 2 else SentimentLabel.NEUTRAL


def harmonize_labels(raw, dataset: str) -> SentimentLabel:
    """Map a dataset-native label onto Negative/Neutral/Positive.

    ``sst``: fine-grained classes 0-4 (0,1 negative; 2 neutral; 3,4 positive).
    ``semeval15-t10``: label names. ``semeval15-t11``: a score in [-5, 5]
    whose sign decides.
    """
    if dataset == "sst":
        try:
            v = int(str(raw).strip())
        except ValueError:
            raise FormatError(f"sst label {raw!r} is not an integer") from None
        if not 0 <= v <= 4:
            raise FormatError(f"sst label {v} outside 0..4")
        return (SentimentLabel.NEGATIVE, SentimentLabel.NEGATIVE, SentimentLabel.NEUTRAL,
                SentimentLabel.POSITIVE, SentimentLabel.POSITIVE)[v]
    if dataset == "semeval15-t10":
        key = str(raw).strip().lower()
        if key not in _T10_NAMES:
            raise FormatError(f"semeval15-t10 label {raw!r} not recognised")
        return _T10_NAMES[key]
    if dataset == "semeval15-t11":
        try:
            v = float(str(raw).strip())
        except ValueError:
            raise FormatError(f"semeval15-t11 label {raw!r} is not a number") from None
        if not math.isfinite(v) or not -5 <= v <= 5:
            raise FormatError(f"semeval15-t11 score {v} outside [-5, 5]")
        if v < 0:
            return SentimentLabel.NEGATIVE
        return SentimentLabel.NEUTRAL if v == 0 else SentimentLabel.POSITIVE
    raise FormatError(f"unknown dataset {dataset!r}; expected one of {', '.join(DATASETS)}")
