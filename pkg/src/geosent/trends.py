"""Weekly per-country aggregation and tweet/case correlation analysis."""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import ArgumentError, NotComputableError
from .ingest import CaseSeries, TweetRecord
from .sentiment.labels import SentimentLabel

GLOBAL = "GLOBAL"
DEFAULT_MAX_LAG = 4
NOT_COMPUTABLE = "NOT-COMPUTABLE"


class ScoredTweet(NamedTuple):
    record: TweetRecord
    countries: frozenset[str]
    label: SentimentLabel


@dataclass(frozen=True)
class WeeklyBucket:
    week: date
    country: str
    n_total: int = 0
    n_pos: int = 0
    n_neg: int = 0
    n_neutral: int = 0

    def __post_init__(self):
        if self.n_pos + self.n_neg + self.n_neutral != self.n_total:
            raise ArgumentError(f"bucket {self.country}/{self.week}: label counts do not sum to total")


class LagPoint(NamedTuple):
    lag: int
    r: float
    n: int


@dataclass
class CorrelationReport:
    country: str
    series_pair: tuple[str, str]
    points: list[LagPoint]
    best_lag: int
    not_computable: list[int] = field(default_factory=list)  # lags with a constant window

    def at(self, lag: int) -> LagPoint | None:
        return next((p for p in self.points if p.lag == lag), None)

    @property
    def best(self) -> LagPoint:
        return self.at(self.best_lag)


def aggregate_weekly(tweets: Iterable[ScoredTweet], weeks: Sequence[date],
                     countries: Sequence[str]) -> list[WeeklyBucket]:
    """Count tweets per (country, week) and per (GLOBAL, week).

    A tweet adds one to GLOBAL and one to each of its countries. Every pair is
    present, zero-filled. Sorted by (country, week).
    """
    week_set = set(weeks)
    allowed = set(countries)
    counts: Counter = Counter()
    for t in tweets:
        day = t.record.day
        if day not in week_set:
            raise ArgumentError(f"tweet {t.record.id} dated {day} is outside the analysed weeks")
        extra = t.countries - allowed
        if extra:
            raise ArgumentError(f"tweet {t.record.id} tagged with unconfigured countries {sorted(extra)}")
        lab = SentimentLabel(t.label)
        for c in (GLOBAL, *t.countries):
            counts[c, day, lab] += 1

    out = []
    for c in sorted({*countries, GLOBAL}):
        for w in sorted(week_set):
            pos = counts[c, w, SentimentLabel.POSITIVE]
            neg = counts[c, w, SentimentLabel.NEGATIVE]
            neu = counts[c, w, SentimentLabel.NEUTRAL]
            out.append(WeeklyBucket(w, c, pos + neg + neu, pos, neg, neu))
    return out


def weekly_cases(cs: CaseSeries, weeks: Sequence[date]) -> list[int]:
    """Sum of daily new cases over the 7 days ending on each week's date."""
    daily = cs.as_dict()
    missing = []
    out = []
    for w in weeks:
        window = [w - timedelta(days=k) for k in range(6, -1, -1)]
        gaps = [d for d in window if d not in daily]
        missing.extend(gaps)
        out.append(sum(daily.get(d, 0) for d in window))
    if missing:
        shown = ", ".join(d.isoformat() for d in sorted(set(missing))[:10])
        more = len(set(missing)) - 10
        raise ArgumentError(f"{cs.country}: case series lacks {shown}" + (f" and {more} more" if more > 0 else ""))
    return out


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation.

    Raises :class:`NotComputableError` when either series is constant.
    """
    n = len(x)
    if n != len(y):
        raise ArgumentError(f"series lengths differ ({n} vs {len(y)})")
    if n < 3:
        raise ArgumentError(f"need at least 3 points, got {n}")
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = [a - mx for a in x]
    dy = [b - my for b in y]
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    if sxx == 0 or syy == 0:
        raise NotComputableError("constant series: correlation is undefined")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def _best_lag_key(p: LagPoint):
    # higher r first, then lag 0, then smaller |lag|, then tweets-lead (positive)
    return (-p.r, p.lag != 0, abs(p.lag), -p.lag)


def lagged_xcorr(x: Sequence[float], y: Sequence[float], max_lag: int = DEFAULT_MAX_LAG,
                 country: str = "", series_pair: tuple[str, str] = ("tweets", "cases")) -> CorrelationReport:
    """Correlate ``x[t]`` with ``y[t + k]`` for every ``k`` in ``[-max_lag, max_lag]``.

    Positive ``k`` means ``x`` leads ``y``. Lags leaving fewer than three
    overlapping points are omitted; lags whose overlap is constant are listed
    in ``not_computable``.
    """
    if len(x) != len(y):
        raise ArgumentError(f"series lengths differ ({len(x)} vs {len(y)})")
    if max_lag < 0:
        raise ArgumentError("max_lag must be >= 0")
    n = len(x)
    points, skipped = [], []
    for k in range(-max_lag, max_lag + 1):
        if k >= 0:
            xs, ys = x[:n - k], y[k:]
        else:
            xs, ys = x[-k:], y[:n + k]
        if len(xs) < 3:
            continue
        try:
            points.append(LagPoint(k, pearson(xs, ys), len(xs)))
        except NotComputableError:
            skipped.append(k)
    if not points:
        if skipped:
            raise NotComputableError(f"{country or 'series'}: correlation undefined at every lag")
        raise ArgumentError(f"{country or 'series'}: no lag has 3 or more overlapping points")
    best = min(points, key=_best_lag_key).lag
    return CorrelationReport(country, series_pair, points, best, skipped)


# --- reports ----------------------------------------------------------------

WEEKLY_COLUMNS = ("week", "n_total", "n_pos", "n_neg", "n_neutral", "weekly_cases")
CORRELATION_COLUMNS = ("country", "lag", "r", "n", "best_lag")


def _fmt_r(r: float) -> str:
    return repr(float(r))


def write_weekly(buckets: Sequence[WeeklyBucket], cases: Mapping[str, Sequence[int]],
                 destination) -> list[Path]:
    """One ``weekly_<country>.csv`` per country present in ``buckets``.

    The ``weekly_cases`` cell is left empty for countries missing from
    ``cases``.
    """
    dest = Path(destination)
    dest.mkdir(parents=True, exist_ok=True)
    by_country: dict[str, list[WeeklyBucket]] = {}
    for b in buckets:
        by_country.setdefault(b.country, []).append(b)

    written = []
    for c in sorted(by_country):
        rows = sorted(by_country[c], key=lambda b: b.week)
        wc = cases.get(c)
        if wc is not None and len(wc) != len(rows):
            raise ArgumentError(f"{c}: {len(wc)} weekly case values for {len(rows)} weeks")
        path = dest / f"weekly_{c}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(WEEKLY_COLUMNS)
            for i, b in enumerate(rows):
                w.writerow([b.week.isoformat(), b.n_total, b.n_pos, b.n_neg, b.n_neutral,
                            "" if wc is None else wc[i]])
        written.append(path)
    return written


def write_correlations(correlations: Iterable[CorrelationReport | tuple[str, str]], destination) -> Path:
    """``correlations.csv``: one row per (country, lag), sorted.

    A ``(country, reason)`` tuple stands for a country with no usable
    correlation and becomes a single ``NOT-COMPUTABLE`` row, as does every lag
    whose window was constant.
    """
    dest = Path(destination)
    dest.mkdir(parents=True, exist_ok=True)
    path = dest / "correlations.csv"
    reports = sorted(correlations, key=lambda r: r[0] if isinstance(r, tuple) else r.country)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CORRELATION_COLUMNS)
        for rep in reports:
            if isinstance(rep, tuple):
                w.writerow([rep[0], "", NOT_COMPUTABLE, "", ""])
                continue
            for p in sorted(rep.points + [LagPoint(k, math.nan, 0) for k in rep.not_computable]):
                if math.isnan(p.r):
                    w.writerow([rep.country, p.lag, NOT_COMPUTABLE, "", ""])
                else:
                    w.writerow([rep.country, p.lag, _fmt_r(p.r), p.n, int(p.lag == rep.best_lag)])
    return path


def emit_report(buckets: Sequence[WeeklyBucket], cases: Mapping[str, Sequence[int]],
                correlations: Iterable[CorrelationReport | tuple[str, str]],
                destination) -> list[Path]:
    """Write the weekly CSVs (``GLOBAL`` included) and ``correlations.csv``.

    Rows are ordered deterministically, so repeated runs give identical bytes.
    """
    return write_weekly(buckets, cases, destination) + [write_correlations(correlations, destination)]


def correlate_all(buckets: Sequence[WeeklyBucket], cases: Mapping[str, Sequence[int]],
                  max_lag: int = DEFAULT_MAX_LAG) -> list[CorrelationReport | tuple[str, str]]:
    """Lagged correlation of weekly tweet frequency against weekly cases per country.

    Countries without case data, or with no computable lag, yield a
    ``(country, reason)`` tuple instead of a report.
    """
    series: dict[str, list[int]] = {}
    for b in sorted(buckets, key=lambda b: (b.country, b.week)):
        series.setdefault(b.country, []).append(b.n_total)
    out: list[CorrelationReport | tuple[str, str]] = []
    for c, x in sorted(series.items()):
        y = cases.get(c)
        if y is None:
            out.append((c, "no case data"))
            continue
        try:
            out.append(lagged_xcorr(x, list(y), max_lag, country=c))
        except ArgumentError as exc:  # includes NotComputableError
            out.append((c, str(exc)))
    return out


def read_weekly_csv(path) -> tuple[list[date], list[int], list[int | None]]:
    """``(weeks, n_total, weekly_cases)`` from a ``weekly_*.csv`` file."""
    from .errors import FormatError

    weeks, totals, cases = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != WEEKLY_COLUMNS:
            raise FormatError(f"expected header {','.join(WEEKLY_COLUMNS)}", str(path), "line 1")
        for lineno, row in enumerate(reader, start=2):
            try:
                weeks.append(date.fromisoformat(row[0]))
                totals.append(int(row[1]))
                cases.append(int(row[5]) if row[5] != "" else None)
            except (ValueError, IndexError):
                raise FormatError("malformed row", str(path), f"line {lineno}") from None
    return weeks, totals, cases
