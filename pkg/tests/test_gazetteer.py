import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import crafted
import synth
from geosent.errors import ArgumentError, FormatError
from geosent.gazetteer import (
    GeoNamesSources,
    Lexicon,
    LocationEntry,
    build_lexicon,
    compile_matcher,
    countries_of,
    default_blocklist,
    normalize_name,
    normalize_text,
    parse_blocklist,
    read_lexicon,
    tag_locations,
    write_lexicon,
)
from geosent.gazetteer.normalize import _build_offsets


# --- normalization -------------------------------------------------------------

@pytest.mark.parametrize("raw,norm", [
    ("São Paulo", "sao paulo"),
    ("#Toronto", "toronto"),
    ("NEW   YORK", "new york"),
    ("  Zürich\t\n", "zurich"),
    ("Straße", "strasse"),
    ("Łódź", "lodz"),
    ("Ｔｏｋｙｏ", "tokyo"),
    ("#Paris#Rome", "paris rome"),
    ("@@", ""),
])
def test_normalize_examples(raw, norm):
    assert normalize_text(raw).text == norm


def test_offset_map_recovers_source():
    text, offsets = normalize_text("Hi  #São Paulo!")
    assert text == "hi sao paulo!"
    i = text.index("sao paulo")
    s, e = offsets.source_span(i, i + len("sao paulo"))
    assert "Hi  #São Paulo!"[s:e] == "São Paulo"


def test_offsets_for_expanding_fold():
    text, offsets = normalize_text("Großstadt")
    assert text == "grossstadt"
    assert offsets.to_list() == [0, 1, 2, 3, 3, 4, 5, 6, 7, 8]


alphabet = st.sampled_from(list("abcXYZ  \t\n#@éüßİıÆ’'-.,0_") + ["́", "\U0001F637", "ﬁ", "Ｔ", " "])
texts = st.lists(alphabet, max_size=40).map("".join)


@given(texts)
@settings(max_examples=400)
def test_fast_and_slow_normalization_agree(text):
    fast = normalize_text(text).text
    slow, offsets = _build_offsets(text)
    assert fast == slow
    assert len(offsets) == len(fast)
    # every normalized char points at a source char that produced it
    for i, src in enumerate(offsets.to_list()):
        assert 0 <= src < len(text)
        if fast[i] != " ":
            assert fast[i] in normalize_text(text[src]).text


@given(texts, st.data())
@settings(max_examples=400)
def test_span_shortcut_matches_full_map(text, data):
    norm = normalize_text(text)
    n = len(norm.text)
    # spans that begin and end on a non-space char, as matches always do
    cand = [i for i in range(n) if norm.text[i] != " "]
    if not cand:
        return
    a = data.draw(st.sampled_from(cand))
    b = data.draw(st.sampled_from([j for j in cand if j >= a]))
    quick = normalize_text(text).source_span(a, b + 1)
    full = norm.offsets.source_span(a, b + 1)
    assert quick == full


@given(texts)
def test_normalize_idempotent(text):
    once = normalize_text(text).text
    assert normalize_text(once).text == once
    assert "  " not in once and once == once.strip()


# --- lexicon -----------------------------------------------------------------------

COUNTRY_INFO = "#ISO\tISO3\tISO-Numeric\tfips\tCountry\n" \
               "CA\tCAN\t124\tCA\tCanada\nFR\tFRA\t250\tFR\tFrance\nUS\tUSA\t840\tUS\tUnited States\n"


def city(gid, name, cc, ascii_name=None):
    cols = [str(gid), name, ascii_name or name, "", "0", "0", "P", "PPL", cc, "", "01", "", "", "",
            "100000", "", "0", "UTC", "2020-01-01"]
    return "\t".join(cols)


@pytest.fixture
def tiny_dumps(tmp_path):
    (tmp_path / "countryInfo.txt").write_text(COUNTRY_INFO, encoding="utf-8")
    (tmp_path / "admin1CodesASCII.txt").write_text("", encoding="utf-8")
    (tmp_path / "cities15000.txt").write_text(
        "\n".join([city(1, "Toronto", "CA"), city(2, "Paris", "FR"), city(3, "Paris", "US")]) + "\n",
        encoding="utf-8")
    return GeoNamesSources.from_dir(tmp_path)


def test_five_line_fixture(tiny_dumps):
    lex = build_lexicon(tiny_dumps, ["CA", "FR", "US"], set())
    cities = sorted(e for e in lex.entries if e.kind == "city")
    assert cities == [LocationEntry("paris", "FR", "city"), LocationEntry("paris", "US", "city"),
                      LocationEntry("toronto", "CA", "city")]
    assert {e.surface for e in lex.entries if e.kind == "country"} == {"canada", "france", "united states"}


def test_no_countries_empty(tiny_dumps):
    assert len(build_lexicon(tiny_dumps, [], set())) == 0


def test_blocklist_and_short_names(tmp_path):
    (tmp_path / "countryInfo.txt").write_text(COUNTRY_INFO, encoding="utf-8")
    (tmp_path / "admin1CodesASCII.txt").write_text("US.NY\tNew York\tNew York\t5128638\n", encoding="utf-8")
    (tmp_path / "cities15000.txt").write_text(
        "\n".join([city(1, "Mobile", "US"), city(2, "Ur", "US"), city(3, "Nice", "FR"), city(4, "Lyon", "FR")]),
        encoding="utf-8")
    lex = build_lexicon(GeoNamesSources.from_dir(tmp_path), ["FR", "US"], parse_blocklist(["# words", "mobile", "NICE"]))
    assert {e.surface for e in lex.entries} == {"france", "united states", "new york", "lyon"}


def test_packaged_blocklist():
    bl = default_blocklist()
    assert {"nice", "mobile", "along"} <= bl
    assert all(w == w.lower() for w in bl)


def test_missing_file_names_it(tmp_path):
    (tmp_path / "countryInfo.txt").write_text(COUNTRY_INFO, encoding="utf-8")
    with pytest.raises(FormatError, match="admin1CodesASCII.txt"):
        build_lexicon(GeoNamesSources.from_dir(tmp_path), ["CA"], set())


def test_bad_line_names_file_and_line(tiny_dumps):
    with open(tiny_dumps.cities, "a", encoding="utf-8") as fh:
        fh.write("4\tBroken\n")
    with pytest.raises(FormatError) as exc:
        build_lexicon(tiny_dumps, ["CA"], set())
    assert "cities15000.txt" in str(exc.value) and "line 4" in str(exc.value)


def test_lexicon_tsv_roundtrip_and_bytes(fixture_lexicon):
    a, b = io.StringIO(), io.StringIO()
    write_lexicon(fixture_lexicon, a)
    write_lexicon(build_lexicon(GeoNamesSources.from_dir(synth.FIXTURE_GEONAMES), synth.FIXTURE_COUNTRIES,
                                default_blocklist()), b)
    assert a.getvalue() == b.getvalue()
    back = read_lexicon(io.StringIO(a.getvalue()))
    assert back == fixture_lexicon
    lines = a.getvalue().splitlines()
    assert lines[0].startswith("# geosent-lexicon format=")
    assert lines[2] == "surface\tcountry\tkind"
    assert lines[3:] == sorted(lines[3:])


def test_read_lexicon_errors():
    with pytest.raises(FormatError):
        read_lexicon(io.StringIO("surface\tcountry\tkind\n"))
    with pytest.raises(FormatError, match="line 3"):
        read_lexicon(io.StringIO("# geosent-lexicon format=1\nsurface\tcountry\tkind\nparis\tFR\n"))


def test_lexicon_invariants(fixture_lexicon):
    assert all(e.country in fixture_lexicon.countries for e in fixture_lexicon.entries)
    assert all(len(e.surface) >= 3 and e.surface == normalize_name(e.surface) for e in fixture_lexicon.entries)
    with pytest.raises(ArgumentError):
        Lexicon(frozenset([LocationEntry("paris", "FR", "city")]), ("US",))


def test_fixture_closure(fixture_lexicon):
    # Córdoba exists in AR too, but AR is not configured
    owners = {e.country for e in fixture_lexicon.entries if e.surface == "cordoba"}
    assert owners == {"ES", "MX"}


# --- matcher -------------------------------------------------------------------------

def lex(*entries):
    es = [LocationEntry(*e) for e in entries]
    return Lexicon(frozenset(es), tuple(sorted({e.country for e in es})))


def test_single_pattern():
    m = compile_matcher(lex(("toronto", "CA", "city")))
    (t,) = tag_locations(m, "stay safe toronto")
    assert t.country == "CA" and t.span == (10, 17) and t.source_span == (10, 17)


def test_longest_match_only():
    m = compile_matcher(lex(("york", "GB", "city"), ("new york", "US", "admin1")))
    tags = tag_locations(m, "new york")
    assert [(t.country, t.matched_surface) for t in tags] == [("US", "new york")]


def test_empty_lexicon_rejected():
    with pytest.raises(ArgumentError):
        compile_matcher(lex())


def test_canada_example(fixture_matcher):
    tags = tag_locations(fixture_matcher, "Thinking of Canada tonight")
    assert [(t.country, t.kind) for t in tags] == [("CA", "country")]


def test_no_places(fixture_matcher):
    assert tag_locations(fixture_matcher, "no places here") == []


def test_ambiguous_surface_tags_all_owners():
    m = compile_matcher(lex(("paris", "FR", "city"), ("paris", "US", "city")))
    tags = tag_locations(m, "lockdown in paris")
    assert [t.country for t in tags] == ["FR", "US"]
    assert tags[0].span == tags[1].span == (12, 17)
    assert countries_of(tags) == {"FR", "US"}


def test_kind_priority_kept_per_country():
    m = compile_matcher(lex(("berlin", "DE", "city"), ("berlin", "DE", "admin1"), ("berlin", "US", "city")))
    assert [(t.country, t.kind) for t in tag_locations(m, "berlin")] == [("DE", "admin1"), ("US", "city")]


def test_matcher_deterministic():
    a = compile_matcher(crafted.LEXICON)
    b = compile_matcher(crafted.LEXICON)
    assert a.n_states == b.n_states
    for text, _ in crafted.cases():
        assert tag_locations(a, text) == tag_locations(b, text)


@pytest.mark.parametrize("text,expected", crafted.cases())
def test_crafted_suite(text, expected):
    m = _crafted_matcher()
    got = {(t.country, *t.source_span) for t in tag_locations(m, text)}
    assert got == expected


_CACHE = {}


def _crafted_matcher():
    if "m" not in _CACHE:
        _CACHE["m"] = compile_matcher(crafted.LEXICON)
    return _CACHE["m"]


words = st.sampled_from(["paris", "rome", "new", "york", "city", "cali", "california", "toronto", "x",
                         "romeo", "#paris", "são", "paulo", "st.", "john's", "canada", "zurich", "9"])
seps = st.sampled_from([" ", "  ", ", ", "", "-", "#", "_"])


@given(st.lists(st.tuples(words, seps), max_size=12))
@settings(max_examples=300)
def test_tag_invariants(parts):
    text = "".join(w + s for w, s in parts)
    m = _crafted_matcher()
    norm = normalize_text(text).text
    tags = tag_locations(m, text)
    regions = sorted({t.span for t in tags})
    for (s1, e1), (s2, e2) in zip(regions, regions[1:]):
        assert e1 <= s2  # pairwise disjoint
    for t in tags:
        s, e = t.span
        assert 0 <= s < e <= len(norm)
        assert norm[s:e] == t.matched_surface
        assert s == 0 or not norm[s - 1].isalnum()
        assert e == len(norm) or not norm[e].isalnum()
        assert t.country in crafted.LEXICON.countries
    assert [t.span[0] for t in tags] == sorted(t.span[0] for t in tags)
    assert tag_locations(m, text) == tags


@given(st.lists(st.tuples(words, st.sampled_from([" ", ", "])), max_size=10))
@settings(max_examples=200)
def test_recall_on_separated_words(parts):
    """With clean separators every planted surface is found, longest first."""
    text = "".join(w + s for w, s in parts)
    m = _crafted_matcher()
    got = [t.matched_surface for t in tag_locations(m, text)]
    # brute-force oracle: greedy leftmost-longest over the words of each
    # comma-free segment (a comma ends any multi-word name)
    surfaces = {e.surface for e in crafted.LEXICON.entries}
    expected = []
    for segment in normalize_text(text).text.split(","):
        toks = segment.split()
        i = 0
        while i < len(toks):
            for j in range(len(toks), i, -1):
                cand = " ".join(toks[i:j])
                if cand in surfaces:
                    expected.append(cand)
                    i = j
                    break
            else:
                i += 1
    dedup = []
    for t in tag_locations(m, text):
        if not dedup or dedup[-1][0] != t.span:
            dedup.append((t.span, t.matched_surface))
    assert [s for _, s in dedup] == expected
