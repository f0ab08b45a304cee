"""Reading tweets and official case counts, keyword filtering, sampling."""

from __future__ import annotations

import csv
import io
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from typing import IO, Iterable, Iterator, Sequence

from .errors import ArgumentError, FormatError
from .rng import SplitMix64

log = logging.getLogger(__name__)

TUESDAY = 1  # date.weekday()


@dataclass(frozen=True)
class TweetRecord:
    id: str
    timestamp: datetime  # tz-aware UTC, whole seconds
    text: str

    def __post_init__(self):
        if not self.id:
            raise ArgumentError("tweet id must be non-empty")
        if not self.text:
            raise ArgumentError(f"tweet {self.id}: text must be non-empty")

    @property
    def day(self) -> date:
        return self.timestamp.date()


@dataclass(frozen=True)
class KeywordSet:
    keywords: tuple[str, ...]

    def __post_init__(self):
        kws = tuple(self.keywords)
        object.__setattr__(self, "keywords", kws)
        if not kws:
            raise ArgumentError("keyword set is empty")
        if len(set(kws)) != len(kws):
            raise ArgumentError("keyword set contains duplicates")
        for k in kws:
            if not k or k != k.lower():
                raise ArgumentError(f"keyword {k!r} is not a non-empty lowercase string")

    @classmethod
    def from_strings(cls, words: Iterable[str]) -> "KeywordSet":
        """Case-fold and de-duplicate ``words``, keeping first occurrence order."""
        return cls(tuple(dict.fromkeys(w.strip().casefold() for w in words if w.strip())))


DEFAULT_KEYWORDS = KeywordSet(("corona", "coronavirus", "pandemic", "sarscov2", "covid", "covid19"))


@dataclass(frozen=True)
class CaseSeries:
    country: str
    dates: tuple[date, ...]
    daily_new_cases: tuple[int, ...]

    def __post_init__(self):
        if len(self.dates) != len(self.daily_new_cases):
            raise ArgumentError("dates and daily_new_cases differ in length")
        for a, b in zip(self.dates, self.dates[1:]):
            if b - a != timedelta(days=1):
                raise ArgumentError(f"{self.country}: dates not contiguous at {a} -> {b}")
        if any(c < 0 for c in self.daily_new_cases):
            raise ArgumentError(f"{self.country}: negative daily count")

    def as_dict(self) -> dict[date, int]:
        return dict(zip(self.dates, self.daily_new_cases))


@dataclass
class SkipTally:
    """Counts of input lines that were skipped rather than parsed."""

    count: int = 0
    reasons: Counter = field(default_factory=Counter)
    first_lines: list[int] = field(default_factory=list)

    def add(self, lineno: int, reason: str) -> None:
        self.count += 1
        self.reasons[reason] += 1
        if len(self.first_lines) < 20:
            self.first_lines.append(lineno)

    def summary(self) -> str:
        if not self.count:
            return "skipped 0 malformed lines"
        detail = ", ".join(f"{r}={n}" for r, n in sorted(self.reasons.items()))
        return f"skipped {self.count} malformed lines ({detail})"


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 instant into aware UTC at second precision.

    A trailing ``Z`` is accepted; naive values are taken to be UTC.
    """
    s = value.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def _parse_line(raw) -> tuple[TweetRecord | None, str | None]:
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError:
            return None, "encoding"
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError:
        return None, "json"
    if not isinstance(obj, dict):
        return None, "not-object"
    tid, created, text = obj.get("id"), obj.get("created_at"), obj.get("text")
    if isinstance(tid, int) and not isinstance(tid, bool):
        tid = str(tid)
    if not isinstance(tid, str) or not isinstance(created, str) or not isinstance(text, str):
        return None, "fields"
    if not tid or not text:
        return None, "empty"
    try:
        ts = parse_timestamp(created)
    except ValueError:
        return None, "timestamp"
    return TweetRecord(tid, ts, text), None


def iter_tweets(source: IO, tally: SkipTally) -> Iterator[TweetRecord]:
    """Yield records from a JSON Lines stream, tallying bad lines in ``tally``.

    Blank lines are ignored and not counted as malformed.
    """
    for lineno, raw in enumerate(source, start=1):
        if not raw.strip():
            continue
        rec, reason = _parse_line(raw)
        if rec is None:
            tally.add(lineno, reason)
            continue
        yield rec


def read_tweets(source: IO) -> tuple[list[TweetRecord], SkipTally]:
    tally = SkipTally()
    records = list(iter_tweets(source, tally))
    return records, tally


def filter_keywords(records: Iterable[TweetRecord], ks: KeywordSet = DEFAULT_KEYWORDS) -> list[TweetRecord]:
    """Keep records whose case-folded text contains any keyword as a substring."""
    kws = ks.keywords
    out = []
    for rec in records:
        folded = rec.text.casefold()
        if any(k in folded for k in kws):
            out.append(rec)
    return out


def tuesdays_between(start: date, end: date) -> list[date]:
    if start > end:
        raise ArgumentError(f"start {start} is after end {end}")
    first = start + timedelta(days=(TUESDAY - start.weekday()) % 7)
    out = []
    d = first
    while d <= end:
        out.append(d)
        d += timedelta(days=7)
    return out


def sample_tuesdays(records: Iterable[TweetRecord], start: date, end: date) -> dict[date, list[TweetRecord]]:
    """Bucket records by Tuesday; every Tuesday in ``[start, end]`` gets a key."""
    buckets: dict[date, list[TweetRecord]] = {d: [] for d in tuesdays_between(start, end)}
    for rec in records:
        bucket = buckets.get(rec.day)
        if bucket is not None:
            bucket.append(rec)
    return buckets


def sample_random(records: Sequence[TweetRecord], n: int, seed: int) -> list[TweetRecord]:
    """Uniform sample of ``n`` records without replacement.

    Runs a partial Fisher-Yates shuffle over indices driven by
    :class:`~geosent.rng.SplitMix64`. The chosen records are returned in their
    original input order.
    """
    if n < 1:
        raise ArgumentError(f"sample size must be >= 1, got {n}")
    records = list(records)
    if n >= len(records):
        return records
    rng = SplitMix64(seed)
    idx = list(range(len(records)))
    for i in range(n):
        j = i + rng.below(len(idx) - i)
        idx[i], idx[j] = idx[j], idx[i]
    return [records[i] for i in sorted(idx[:n])]


# --- official case counts -------------------------------------------------

_COUNTRY_COLUMNS = ("Country/Region", "Country_Region", "country", "Country")


def _parse_mdy(s: str) -> date | None:
    parts = s.strip().split("/")
    if len(parts) != 3 or not all(p.isdigit() for p in parts):
        return None
    m, d, y = (int(p) for p in parts)
    if y < 100:
        y += 2000
    try:
        return date(y, m, d)
    except ValueError:
        return None


def _parse_count(cell: str) -> int:
    s = cell.strip()
    try:
        return int(s)
    except ValueError:
        v = float(s)  # raises ValueError for junk
        if v != int(v):
            raise ValueError(s) from None
        return int(v)


def read_case_series(source: IO[str], countries: Iterable[str] | None = None,
                     name: str = "<cases>") -> dict[str, CaseSeries]:
    """Read a wide cumulative-count CSV into per-country daily new cases.

    Sub-national rows are summed per country before differencing; downward
    revisions are clamped to zero. ``countries=None`` returns every country in
    the file. Requested countries absent from the file are left out of the
    result.
    """
    if isinstance(source, (bytes, bytearray)):
        source = io.StringIO(source.decode("utf-8"))
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty case file", name, "line 1") from None
    header = [h.lstrip("\ufeff").strip() for h in header]

    country_col = next((header.index(c) for c in _COUNTRY_COLUMNS if c in header), None)
    if country_col is None:
        raise FormatError("no country column in header", name, "line 1")
    first_date_col = next((i for i, h in enumerate(header) if _parse_mdy(h)), None)
    if first_date_col is None:
        raise FormatError("no date columns (expected M/D/YY headers)", name, "line 1")
    dates = []
    for i in range(first_date_col, len(header)):
        d = _parse_mdy(header[i])
        if d is None:
            raise FormatError(f"column {i + 1} header {header[i]!r} is not a M/D/YY date", name, "line 1")
        if dates and d - dates[-1] != timedelta(days=1):
            raise FormatError(f"date columns not contiguous at {header[i]!r}", name, "line 1")
        dates.append(d)

    wanted = None if countries is None else set(countries)
    totals: dict[str, list[int]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise FormatError(f"expected {len(header)} cells, found {len(row)}", name, f"line {lineno}")
        country = row[country_col].strip()
        if wanted is not None and country not in wanted:
            continue
        acc = totals.setdefault(country, [0] * len(dates))
        for k, i in enumerate(range(first_date_col, len(header))):
            try:
                v = _parse_count(row[i])
            except ValueError:
                raise FormatError(f"unparseable count {row[i]!r} in column {header[i]!r}",
                                  name, f"line {lineno}") from None
            if v < 0:
                raise FormatError(f"negative cumulative count {v} in column {header[i]!r}",
                                  name, f"line {lineno}")
            acc[k] += v

    out = {}
    for country in sorted(totals):
        out[country] = CaseSeries(country, tuple(dates), tuple(cumulative_to_daily(totals[country])))
    return out


def cumulative_to_daily(cumulative: Sequence[int]) -> list[int]:
    """First differences with the first value kept; negatives clamped to 0."""
    daily = []
    prev = 0
    for v in cumulative:
        daily.append(max(v - prev, 0))
        prev = v
    return daily


def world_series(series: dict[str, CaseSeries], label: str = "GLOBAL") -> CaseSeries | None:
    """Sum several country series day by day (all must share one date axis)."""
    if not series:
        return None
    items = list(series.values())
    dates = items[0].dates
    for s in items:
        if s.dates != dates:
            raise ArgumentError(f"{s.country}: date axis differs from {items[0].country}")
    sums = [sum(col) for col in zip(*(s.daily_new_cases for s in items))]
    return CaseSeries(label, dates, tuple(sums))
