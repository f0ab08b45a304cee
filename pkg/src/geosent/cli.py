"""Command-line entry point.

Every subcommand reads one settings record assembled from an optional TOML
config file and command-line flags (flags win). Data goes to files under
``--output``; human-readable summaries go to stderr.

Exit codes: 0 success, 1 I/O error, 2 format or argument error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from collections import Counter
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .countries import STUDY_ISO_CODES, jhu_name
from .errors import ArgumentError, EmptyInputError, FormatError
from .gazetteer import (
    GeoNamesSources,
    build_lexicon,
    compile_matcher,
    countries_of,
    default_blocklist,
    parse_blocklist,
    read_lexicon,
    tag_locations,
    write_lexicon,
)
from .ingest import (
    DEFAULT_KEYWORDS,
    KeywordSet,
    filter_keywords,
    read_case_series,
    read_tweets,
    sample_random,
    sample_tuesdays,
    world_series,
)
from .rng import derive_seed
from .sentiment import (
    Hyperparams,
    SentimentLabel,
    SentimentModel,
    argmax_label,
    load_model,
    majority_vote,
    read_training_tsv,
    save_model,
    train,
)
from .trends import (
    DEFAULT_MAX_LAG,
    GLOBAL,
    ScoredTweet,
    aggregate_weekly,
    correlate_all,
    lagged_xcorr,
    read_weekly_csv,
    weekly_cases,
    write_correlations,
    write_weekly,
)

EXIT_OK, EXIT_IO, EXIT_FORMAT = 0, 1, 2

_PATH_KEYS = ("tweets", "geonames", "blocklist", "lexicon", "cases", "model", "training", "output", "weekly")


@dataclass
class PipelineConfig:
    tweets: Path | None = None
    geonames: Path | None = None
    blocklist: Path | None = None  # None: packaged list
    lexicon: Path | None = None  # prebuilt TSV; overrides geonames
    cases: Path | None = None
    model: Path | None = None
    training: Path | None = None
    weekly: Path | None = None  # input dir for `correlate`; defaults to output
    output: Path = Path("out")
    start: date = date(2020, 3, 23)
    end: date = date(2020, 6, 23)
    keywords: tuple[str, ...] = DEFAULT_KEYWORDS.keywords
    countries: tuple[str, ...] = STUDY_ISO_CODES
    sample_size: int = 150_000
    seed: int = 0
    max_lag: int = DEFAULT_MAX_LAG
    lr: float = Hyperparams.lr
    batch_size: int = Hyperparams.batch_size
    epochs: int = Hyperparams.epochs
    dim: int = 64
    table_size: int = 1 << 16

    def validate(self) -> None:
        if self.start > self.end:
            raise ArgumentError(f"start {self.start} is after end {self.end}")
        if self.sample_size < 1:
            raise ArgumentError(f"sample_size must be >= 1, got {self.sample_size}")
        if self.max_lag < 0:
            raise ArgumentError(f"max_lag must be >= 0, got {self.max_lag}")
        if not self.countries:
            raise ArgumentError("country list is empty")
        KeywordSet(self.keywords)

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ArgumentError("missing setting(s): " + ", ".join(missing)
                                + " (give them in --config or as flags)")


_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}


def _coerce(key: str, value, origin: str):
    """Convert a raw config/flag value to the type of field ``key``."""
    try:
        if key in _PATH_KEYS:
            return Path(value)
        if key in ("start", "end"):
            return value if isinstance(value, date) else date.fromisoformat(str(value))
        if key in ("keywords", "countries"):
            items = value.split(",") if isinstance(value, str) else list(value)
            items = [str(v).strip() for v in items if str(v).strip()]
            if key == "keywords":
                return KeywordSet.from_strings(items).keywords
            return tuple(dict.fromkeys(v.upper() for v in items))
        if key == "lr":
            return float(value)
        if isinstance(value, bool):
            raise ValueError("boolean")
        return int(value)
    except (ValueError, TypeError, ArgumentError) as exc:
        raise FormatError(f"bad value {value!r} for {key!r}: {exc}", origin) from None


def load_config(path) -> dict:
    """Flat key/value settings from a TOML file; relative paths resolve against it."""
    p = Path(path)
    try:
        with open(p, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise FormatError(str(exc), str(p)) from None
    out = {}
    for key, value in raw.items():
        k = key.replace("-", "_")
        if k not in _FIELDS:
            raise FormatError(f"unknown setting {key!r}", str(p))
        v = _coerce(k, value, str(p))
        if k in _PATH_KEYS and not v.is_absolute():
            v = p.parent / v
        out[k] = v
    return out


def make_config(args: argparse.Namespace) -> PipelineConfig:
    values = load_config(args.config) if getattr(args, "config", None) else {}
    for k in _FIELDS:
        v = getattr(args, k, None)
        if v is not None:
            values[k] = _coerce(k, v, "command line")
    cfg = PipelineConfig(**values)
    cfg.validate()
    return cfg


def say(msg: str) -> None:
    print(msg, file=sys.stderr)


# --- shared steps -------------------------------------------------------------

def _blocklist(cfg: PipelineConfig) -> frozenset[str]:
    if cfg.blocklist is None:
        return default_blocklist()
    with open(cfg.blocklist, encoding="utf-8") as fh:
        return parse_blocklist(fh)


def _lexicon(cfg: PipelineConfig):
    if cfg.lexicon is not None:
        with open(cfg.lexicon, encoding="utf-8") as fh:
            return read_lexicon(fh, str(cfg.lexicon))
    cfg.require("geonames")
    return build_lexicon(GeoNamesSources.from_dir(cfg.geonames), cfg.countries, _blocklist(cfg))


def _read_tweets(cfg: PipelineConfig):
    cfg.require("tweets")
    with open(cfg.tweets, "rb") as fh:
        records, tally = read_tweets(fh)
    say(f"read {len(records)} records from {cfg.tweets}")
    say(tally.summary())
    return records, tally


def _score(model: SentimentModel, text: str) -> tuple[SentimentLabel, tuple[SentimentLabel, ...]]:
    try:
        per_head = tuple(argmax_label(p) for p in model.probabilities(text))
    except EmptyInputError:
        # no tokens at all: nothing to classify
        per_head = (SentimentLabel.NEUTRAL,) * len(model.heads)
    return majority_vote(per_head), per_head


def _label_summary(labels) -> str:
    c = Counter(labels)
    return "labels: " + " ".join(f"{lab}={c[lab]}" for lab in SentimentLabel)


def _weekly_case_map(cfg: PipelineConfig, weeks: list[date]) -> dict[str, list[int]]:
    """Weekly case sums per configured country and for the whole file (GLOBAL)."""
    if cfg.cases is None:
        return {}
    with open(cfg.cases, encoding="utf-8", newline="") as fh:
        series = read_case_series(fh, None, str(cfg.cases))
    out = {}
    for iso in cfg.countries:
        cs = series.get(jhu_name(iso))
        if cs is None:
            say(f"no case data for {iso} ({jhu_name(iso)})")
            continue
        out[iso] = weekly_cases(cs, weeks)
    world = world_series(series, GLOBAL)
    if world is not None:
        out[GLOBAL] = weekly_cases(world, weeks)
    return out


# --- subcommands ----------------------------------------------------------------

def cmd_build_lexicon(cfg: PipelineConfig) -> int:
    cfg.require("geonames")
    lex = build_lexicon(GeoNamesSources.from_dir(cfg.geonames), cfg.countries, _blocklist(cfg))
    cfg.output.mkdir(parents=True, exist_ok=True)
    path = cfg.output / "lexicon.tsv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_lexicon(lex, fh)
    kinds = lex.kind_counts()
    say(f"lexicon: {len(lex)} entries for {len(lex.countries)} countries "
        f"(country={kinds['country']} admin1={kinds['admin1']} city={kinds['city']}) -> {path}")
    return EXIT_OK


def cmd_train(cfg: PipelineConfig) -> int:
    cfg.require("training")
    with open(cfg.training, encoding="utf-8", newline="") as fh:
        examples = read_training_tsv(fh, str(cfg.training))
    hp = Hyperparams(cfg.lr, cfg.batch_size, cfg.epochs, derive_seed(cfg.seed, 2))
    say(f"hyperparameters: lr={hp.lr:g} batch={hp.batch_size} epochs={hp.epochs} seed={cfg.seed}")
    say(f"training examples: {len(examples)} "
        + " ".join(f"{k}={v}" for k, v in sorted(Counter(e.dataset for e in examples).items())))
    model = SentimentModel.initial(cfg.dim, cfg.table_size, derive_seed(cfg.seed, 1))
    model, trace = train(model, examples, hp)

    cfg.output.mkdir(parents=True, exist_ok=True)
    model_path = cfg.model or cfg.output / "model.bin"
    save_model(model, model_path)
    trace_path = cfg.output / "train_trace.csv"
    with open(trace_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("epoch", "dataset", "loss", "accuracy"))
        for st in trace:
            for ds in st.loss:
                w.writerow((st.epoch, ds, repr(st.loss[ds]), repr(st.accuracy[ds])))
            w.writerow((st.epoch, "ensemble", "", repr(st.accuracy["ensemble"])))
    last = trace[-1]
    say(f"final ensemble accuracy {last.accuracy['ensemble']:.4f} -> {model_path}, {trace_path}")
    return EXIT_OK


def cmd_tag(cfg: PipelineConfig) -> int:
    records, _ = _read_tweets(cfg)
    matcher = compile_matcher(_lexicon(cfg))
    cfg.output.mkdir(parents=True, exist_ok=True)
    path = cfg.output / "tags.jsonl"
    n_tagged = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            tags = tag_locations(matcher, rec.text)
            n_tagged += bool(tags)
            row = {
                "id": rec.id,
                "countries": sorted(countries_of(tags)),
                "tags": [{"country": t.country, "surface": t.matched_surface, "kind": t.kind,
                          "span": list(t.span), "source_span": list(t.source_span)} for t in tags],
            }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    say(f"tagged {n_tagged} of {len(records)} records -> {path}")
    return EXIT_OK


def cmd_score(cfg: PipelineConfig) -> int:
    cfg.require("model")
    records, _ = _read_tweets(cfg)
    model = load_model(cfg.model)
    cfg.output.mkdir(parents=True, exist_ok=True)
    path = cfg.output / "scores.csv"
    labels = []
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label", *(f"head_{hd.trained_on}" for hd in model.heads)])
        for rec in records:
            final, per_head = _score(model, rec.text)
            labels.append(final)
            w.writerow([rec.id, str(final), *map(str, per_head)])
    say(_label_summary(labels))
    say(f"scored {len(records)} records -> {path}")
    return EXIT_OK


def cmd_run(cfg: PipelineConfig) -> int:
    """Filter, sample per Tuesday, tag, score, aggregate and correlate."""
    cfg.require("model")
    records, _ = _read_tweets(cfg)
    kept = filter_keywords(records, KeywordSet(cfg.keywords))
    say(f"filtered {len(kept)} records matching {len(cfg.keywords)} keywords")

    by_day = sample_tuesdays(kept, cfg.start, cfg.end)
    weeks = sorted(by_day)
    sampled = []
    for day in weeks:
        if by_day[day]:
            sampled.extend(sample_random(by_day[day], cfg.sample_size, derive_seed(cfg.seed, day.toordinal())))
    say(f"sampled {len(sampled)} records over {len(weeks)} Tuesdays (n <= {cfg.sample_size} each)")

    matcher = compile_matcher(_lexicon(cfg))
    allowed = set(cfg.countries)
    model = load_model(cfg.model)
    scored = []
    n_tagged = 0
    for rec in sampled:
        cc = countries_of(tag_locations(matcher, rec.text)) & allowed
        n_tagged += bool(cc)
        label, _ = _score(model, rec.text)
        scored.append(ScoredTweet(rec, cc, label))
    say(f"tagged {n_tagged} of {len(sampled)} sampled records with a country")
    say(_label_summary(t.label for t in scored))

    buckets = aggregate_weekly(scored, weeks, cfg.countries)
    cases = _weekly_case_map(cfg, weeks)
    write_weekly(buckets, cases, cfg.output)
    write_correlations(correlate_all(buckets, cases, cfg.max_lag), cfg.output)
    say(f"wrote {len({b.country for b in buckets})} weekly tables and correlations.csv -> {cfg.output}")
    return EXIT_OK


def cmd_correlate(cfg: PipelineConfig) -> int:
    """Recompute ``correlations.csv`` from existing ``weekly_*.csv`` tables."""
    src = cfg.weekly or cfg.output
    files = sorted(Path(src).glob("weekly_*.csv"))
    if not files:
        raise FileNotFoundError(f"no weekly_*.csv tables in {src}")
    reports = []
    for path in files:
        country = path.stem[len("weekly_"):]
        _, totals, cases = read_weekly_csv(path)
        if any(c is None for c in cases):
            reports.append((country, "no case data"))
            continue
        try:
            reports.append(lagged_xcorr(totals, cases, cfg.max_lag, country=country))
        except ArgumentError as exc:
            reports.append((country, str(exc)))
    out = write_correlations(reports, cfg.output)
    say(f"correlated {len(files)} weekly tables -> {out}")
    return EXIT_OK


COMMANDS = {
    "build-lexicon": (cmd_build_lexicon, "build the location lexicon TSV from GeoNames dumps"),
    "train": (cmd_train, "train the three-head sentiment model"),
    "tag": (cmd_tag, "tag tweets with the countries they mention"),
    "score": (cmd_score, "label tweets Negative/Neutral/Positive"),
    "run": (cmd_run, "full pipeline: weekly tables and correlations"),
    "correlate": (cmd_correlate, "recompute correlations from weekly tables"),
}


def _shared_options() -> argparse.ArgumentParser:
    # SUPPRESS keeps unset flags out of the namespace so config values survive
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", metavar="PATH", help="TOML settings file")
    p.add_argument("--seed", type=int, help="master random seed")
    p.add_argument("--output", metavar="DIR", help="output directory")
    g = p.add_argument_group("inputs")
    for name in ("tweets", "geonames", "blocklist", "lexicon", "cases", "model", "training", "weekly"):
        g.add_argument(f"--{name}", metavar="PATH")
    g = p.add_argument_group("parameters")
    g.add_argument("--start", metavar="YYYY-MM-DD")
    g.add_argument("--end", metavar="YYYY-MM-DD")
    g.add_argument("--keywords", metavar="W1,W2,...")
    g.add_argument("--countries", metavar="CC1,CC2,...")
    g.add_argument("--sample-size", dest="sample_size", type=int)
    g.add_argument("--max-lag", dest="max_lag", type=int)
    g.add_argument("--lr", type=float)
    g.add_argument("--batch-size", dest="batch_size", type=int)
    g.add_argument("--epochs", type=int)
    g.add_argument("--dim", type=int)
    g.add_argument("--table-size", dest="table_size", type=int)
    return p


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_options()
    parser = argparse.ArgumentParser(prog="geosent", parents=[shared],
                                     description="Geotagged tweet sentiment and case-trend pipeline.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[shared], help=help_text, description=help_text)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        return COMMANDS[args.command][0](cfg)
    except (FormatError, ArgumentError) as exc:
        say(f"error: {exc}")
        return EXIT_FORMAT
    except OSError as exc:
        say(f"error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
