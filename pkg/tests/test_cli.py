import csv
import json
import re

import pytest

import synth
from geosent import __version__
from geosent.cli import build_parser, load_config, main, make_config
from geosent.ingest import tuesdays_between


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().err


def read(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_subcommands_listed():
    help_text = build_parser().format_help()
    for cmd in ("build-lexicon", "train", "tag", "score", "run", "correlate"):
        assert cmd in help_text


def test_unknown_flag_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--bogus"])
    assert exc.value.code == 2


# --- config -----------------------------------------------------------------------

def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('seed = 3\nsample-size = 10\ntweets = "t.jsonl"\ncountries = "fr,us"\n')
    args = build_parser().parse_args(["run", "--config", str(cfg), "--seed", "9"])
    c = make_config(args)
    assert c.seed == 9 and c.sample_size == 10
    assert c.tweets == tmp_path / "t.jsonl"
    assert c.countries == ("FR", "US")


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("seed = [\n")
    assert run(capsys, "run", "--config", bad)[0] == 2
    bad.write_text("colour = 1\n")
    code, err = run(capsys, "run", "--config", bad)
    assert code == 2 and "colour" in err
    bad.write_text('start = "2020-06-01"\nend = "2020-05-01"\n')
    assert run(capsys, "run", "--config", bad)[0] == 2
    assert run(capsys, "run", "--config", tmp_path / "missing.toml")[0] == 1


def test_load_config_types(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('start = 2020-03-23\nkeywords = ["COVID", "corona"]\nlr = 0.01\nmax_lag = 2\n')
    c = load_config(p)
    assert str(c["start"]) == "2020-03-23" and c["keywords"] == ("covid", "corona")
    assert c["lr"] == 0.01 and c["max_lag"] == 2


# --- build-lexicon ----------------------------------------------------------------------

def test_build_lexicon_reproducible(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        code, err = run(capsys, "build-lexicon", "--geonames", synth.FIXTURE_GEONAMES,
                        "--countries", ",".join(synth.FIXTURE_COUNTRIES), "--output", tmp_path / name)
        assert code == 0
        assert re.search(r"lexicon: \d+ entries .*country=11 admin1=\d+ city=\d+", err)
        outs.append((tmp_path / name / "lexicon.tsv").read_bytes())
    assert outs[0] == outs[1]


def test_build_lexicon_missing_dump(tmp_path, capsys):
    (tmp_path / "countryInfo.txt").write_text("CA\tCAN\t124\tCA\tCanada\n")
    code, err = run(capsys, "build-lexicon", "--geonames", tmp_path, "--output", tmp_path / "o")
    assert code == 2 and "admin1CodesASCII.txt" in err


def test_build_lexicon_custom_blocklist(tmp_path, capsys):
    bl = tmp_path / "bl.txt"
    bl.write_text("paris\n")
    run(capsys, "build-lexicon", "--geonames", synth.FIXTURE_GEONAMES, "--blocklist", bl,
        "--countries", "FR,US", "--output", tmp_path)
    assert "\nparis\t" not in (tmp_path / "lexicon.tsv").read_text()


# --- train -------------------------------------------------------------------------------

def test_train_defaults_and_toy_accuracy(tmp_path, capsys):
    data = tmp_path / "toy.tsv"
    data.write_text(synth.training_tsv())
    code, err = run(capsys, "train", "--training", data, "--output", tmp_path / "a", "--seed", 1)
    assert code == 0
    assert "lr=0.0005 batch=32 epochs=12" in err
    trace = read(tmp_path / "a" / "train_trace.csv")
    assert trace[0] == ["epoch", "dataset", "loss", "accuracy"]
    final = [r for r in trace if r[0] == "12" and r[1] == "ensemble"]
    assert float(final[0][3]) == 1.0
    run(capsys, "train", "--training", data, "--output", tmp_path / "b", "--seed", 1)
    assert (tmp_path / "a" / "model.bin").read_bytes() == (tmp_path / "b" / "model.bin").read_bytes()


def test_train_bad_label(tmp_path, capsys):
    data = tmp_path / "bad.tsv"
    data.write_text("sst\t7\tgreat\n")
    code, err = run(capsys, "train", "--training", data, "--output", tmp_path)
    assert code == 2 and "line 1" in err


# --- run ----------------------------------------------------------------------------------

@pytest.fixture
def inputs(tmp_path):
    return tmp_path, synth.write_run_inputs(tmp_path)


def test_run_matches_oracle(inputs, capsys):
    d, info = inputs
    code, err = run(capsys, "run", "--config", d / "config.toml", "--output", d / "out")
    assert code == 0, err
    expected = synth.expected_weekly(info["truth"], info["daily"])
    for c, rows in expected.items():
        got = read(d / "out" / f"weekly_{c}.csv")
        assert got[1:] == rows, c
    n_kw = sum(t.has_keyword for t in info["truth"])
    assert f"read 1000 records" in err and f"filtered {n_kw} records" in err
    assert "skipped 0 malformed lines" in err


def test_run_byte_identical(inputs, capsys):
    d, _ = inputs
    for name in ("a", "b"):
        assert run(capsys, "run", "--config", d / "config.toml", "--output", d / name)[0] == 0
    files = sorted(p.name for p in (d / "a").iterdir())
    assert "correlations.csv" in files and len(files) == 13
    for f in files:
        assert (d / "a" / f).read_bytes() == (d / "b" / f).read_bytes()


def test_run_sampling_caps_each_tuesday(inputs, capsys):
    d, info = inputs
    code, err = run(capsys, "run", "--config", d / "config.toml", "--output", d / "o", "--sample-size", 5)
    assert code == 0
    weeks = tuesdays_between(synth.START, synth.END)
    per_week = {w: sum(1 for t in info["truth"] if t.has_keyword and t.day == w) for w in weeks}
    glob = read(d / "o" / "weekly_GLOBAL.csv")[1:]
    assert [int(r[1]) for r in glob] == [min(5, per_week[w]) for w in weeks]
    assert f"sampled {sum(min(5, v) for v in per_week.values())} records" in err
    # a different seed draws a different sample
    run(capsys, "run", "--config", d / "config.toml", "--output", d / "p", "--sample-size", 5, "--seed", 12)
    assert (d / "o" / "weekly_FR.csv").read_bytes() != (d / "p" / "weekly_FR.csv").read_bytes() or \
        (d / "o" / "weekly_US.csv").read_bytes() != (d / "p" / "weekly_US.csv").read_bytes()


def test_run_empty_tweets(inputs, capsys):
    d, _ = inputs
    (d / "tweets.jsonl").write_text("")
    code, err = run(capsys, "run", "--config", d / "config.toml", "--output", d / "out")
    assert code == 0
    rows = read(d / "out" / "weekly_FR.csv")
    assert len(rows) == 15 and all(r[1:5] == ["0"] * 4 for r in rows[1:])
    corr = read(d / "out" / "correlations.csv")
    assert all(r[2] == "NOT-COMPUTABLE" for r in corr[1:])


def test_run_corrupt_cases(inputs, capsys):
    d, _ = inputs
    lines = (d / "cases.csv").read_text().splitlines()
    cells = lines[3].split(",")
    cells[40] = "12x"
    lines[3] = ",".join(cells)
    (d / "cases.csv").write_text("\n".join(lines) + "\n")
    code, err = run(capsys, "run", "--config", d / "config.toml", "--output", d / "out")
    assert code == 2
    header = lines[0].split(",")
    assert "line 4" in err and "12x" in err and header[40] in err


def test_run_missing_tweets_is_io_error(inputs, capsys):
    d, _ = inputs
    code, err = run(capsys, "run", "--config", d / "config.toml", "--tweets", d / "nope.jsonl")
    assert code == 1 and "nope.jsonl" in err


def test_run_needs_model(tmp_path, capsys):
    code, err = run(capsys, "run", "--tweets", tmp_path / "t.jsonl")
    assert code == 2 and "model" in err


def test_run_malformed_lines_tallied(tmp_path, capsys):
    info = synth.write_run_inputs(tmp_path, n=900, malformed_every=9)
    code, err = run(capsys, "run", "--config", tmp_path / "config.toml", "--output", tmp_path / "out")
    assert code == 0
    assert info["n_broken"] == 100
    assert "read 900 records" in err and "skipped 100 malformed lines" in err


# --- tag / score / correlate ---------------------------------------------------------------

def test_tag_and_score(inputs, capsys):
    d, info = inputs
    code, err = run(capsys, "tag", "--config", d / "config.toml", "--output", d / "t")
    assert code == 0
    rows = [json.loads(l) for l in (d / "t" / "tags.jsonl").read_text().splitlines()]
    assert len(rows) == 1000
    for row, t in zip(rows, info["truth"]):
        assert row["id"] == t.id and set(row["countries"]) == t.countries
    code, err = run(capsys, "score", "--config", d / "config.toml", "--output", d / "s")
    assert code == 0
    scores = read(d / "s" / "scores.csv")
    assert scores[0][:2] == ["id", "label"]
    names = {0: "negative", 1: "neutral", 2: "positive"}
    assert [r[1] for r in scores[1:]] == [names[t.label] for t in info["truth"]]


def test_tag_with_prebuilt_lexicon(inputs, capsys):
    d, _ = inputs
    run(capsys, "build-lexicon", "--config", d / "config.toml", "--output", d / "lex")
    run(capsys, "tag", "--config", d / "config.toml", "--output", d / "t1")
    run(capsys, "tag", "--config", d / "config.toml", "--lexicon", d / "lex" / "lexicon.tsv", "--output", d / "t2")
    assert (d / "t1" / "tags.jsonl").read_bytes() == (d / "t2" / "tags.jsonl").read_bytes()


def test_correlate_reproduces_run(inputs, capsys):
    d, _ = inputs
    run(capsys, "run", "--config", d / "config.toml", "--output", d / "out")
    original = (d / "out" / "correlations.csv").read_bytes()
    code, _ = run(capsys, "correlate", "--weekly", d / "out", "--output", d / "again")
    assert code == 0
    assert (d / "again" / "correlations.csv").read_bytes() == original


def test_correlate_without_tables(tmp_path, capsys):
    assert run(capsys, "correlate", "--output", tmp_path)[0] == 1
