"""Country-attributed place-name lexicon built from GeoNames dumps."""

from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, NamedTuple

from ..errors import ArgumentError, FormatError
from .normalize import normalize_name

KINDS = ("country", "admin1", "city")
KIND_PRIORITY = {k: i for i, k in enumerate(KINDS)}  # lower wins
MIN_SURFACE_LEN = 3

FORMAT_VERSION = 1
_TSV_MAGIC = f"# geosent-lexicon format={FORMAT_VERSION}"
_TSV_HEADER = "surface\tcountry\tkind"

COUNTRY_INFO_FILE = "countryInfo.txt"
ADMIN1_FILE = "admin1CodesASCII.txt"
CITIES_FILE = "cities15000.txt"


class LocationEntry(NamedTuple):
    surface: str
    country: str
    kind: str


@dataclass(frozen=True)
class GeoNamesSources:
    country_info: Path
    admin1: Path
    cities: Path

    @classmethod
    def from_dir(cls, directory) -> "GeoNamesSources":
        d = Path(directory)
        return cls(d / COUNTRY_INFO_FILE, d / ADMIN1_FILE, d / CITIES_FILE)


@dataclass(frozen=True)
class Lexicon:
    entries: frozenset[LocationEntry]
    countries: tuple[str, ...]

    def __post_init__(self):
        allowed = set(self.countries)
        for e in self.entries:
            if e.country not in allowed:
                raise ArgumentError(f"entry {e} has unconfigured country")
            if e.kind not in KIND_PRIORITY:
                raise ArgumentError(f"entry {e} has unknown kind")
            if not e.surface:
                raise ArgumentError("empty surface")

    def __len__(self) -> int:
        return len(self.entries)

    def sorted_entries(self) -> list[LocationEntry]:
        return sorted(self.entries)

    def kind_counts(self) -> Counter:
        return Counter(e.kind for e in self.entries)

    def surfaces(self) -> set[str]:
        return {e.surface for e in self.entries}


def default_blocklist() -> frozenset[str]:
    """The curated blocklist shipped with the package."""
    text = resources.files("geosent.data").joinpath("blocklist.txt").read_text(encoding="utf-8")
    return parse_blocklist(io.StringIO(text))


def parse_blocklist(lines: Iterable[str]) -> frozenset[str]:
    words = set()
    for line in lines:
        w = line.split("#", 1)[0].strip()
        if w:
            words.add(normalize_name(w))
    return frozenset(words)


def _rows(path: Path, min_cols: int):
    """Yield ``(lineno, columns)`` for data lines of a GeoNames TSV."""
    try:
        fh = open(path, encoding="utf-8-sig")
    except FileNotFoundError:
        raise FormatError("GeoNames file not found", str(path)) from None
    except OSError as exc:
        raise FormatError(f"cannot read GeoNames file ({exc.strerror})", str(path)) from None
    with fh:
        try:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\r\n")
                if not line or line.startswith("#"):
                    continue
                cols = line.split("\t")
                if len(cols) < min_cols:
                    raise FormatError(f"expected at least {min_cols} tab-separated columns, found {len(cols)}",
                                      str(path), f"line {lineno}")
                yield lineno, cols
        except UnicodeDecodeError as exc:
            raise FormatError(f"not valid UTF-8 ({exc.reason})", str(path)) from None


def _keep(surface: str, blocklist: frozenset[str]) -> bool:
    return len(surface) >= MIN_SURFACE_LEN and surface not in blocklist and any(c.isalnum() for c in surface)


def build_lexicon(sources: GeoNamesSources, countries: Iterable[str],
                  blocklist: Iterable[str] = frozenset()) -> Lexicon:
    """Collect country, admin1 and city names for ``countries``.

    Reads column 0 (ISO code) and 4 (name) of ``countryInfo.txt``; columns 0
    (``CC.code``) and 1 (name) of the admin1 file; columns 1 (name), 2 (ASCII
    name) and 8 (country code) of the cities file. Surfaces shorter than
    three characters or present in ``blocklist`` are dropped.
    """
    wanted = tuple(dict.fromkeys(countries))
    block = frozenset(normalize_name(w) for w in blocklist)
    entries: set[LocationEntry] = set()
    country_set = set(wanted)

    def add(name: str, cc: str, kind: str) -> None:
        surface = normalize_name(name)
        if _keep(surface, block):
            entries.add(LocationEntry(surface, cc, kind))

    # all three files are parsed even when no countries are configured so a
    # broken dump is reported either way
    for lineno, cols in _rows(sources.country_info, 5):
        cc = cols[0].strip()
        if len(cc) != 2:
            raise FormatError(f"bad ISO code {cc!r}", str(sources.country_info), f"line {lineno}")
        if cc in country_set:
            add(cols[4], cc, "country")

    for lineno, cols in _rows(sources.admin1, 2):
        code = cols[0].strip()
        cc, dot, _ = code.partition(".")
        if not dot or len(cc) != 2:
            raise FormatError(f"bad admin1 code {code!r}", str(sources.admin1), f"line {lineno}")
        if cc in country_set:
            add(cols[1], cc, "admin1")

    for lineno, cols in _rows(sources.cities, 9):
        cc = cols[8].strip()
        if cc in country_set:
            add(cols[1], cc, "city")
            if cols[2] and cols[2] != cols[1]:
                add(cols[2], cc, "city")

    return Lexicon(frozenset(entries), wanted)


def write_lexicon(lex: Lexicon, out: IO[str]) -> None:
    """Write the sorted TSV form; identical lexicons give identical bytes."""
    out.write(_TSV_MAGIC + "\n")
    out.write("# countries=" + ",".join(lex.countries) + "\n")
    out.write(_TSV_HEADER + "\n")
    for e in lex.sorted_entries():
        out.write(f"{e.surface}\t{e.country}\t{e.kind}\n")


def read_lexicon(src: IO[str], name: str = "<lexicon>") -> Lexicon:
    countries: tuple[str, ...] | None = None
    entries = set()
    seen_header = False
    for lineno, line in enumerate(src, start=1):
        line = line.rstrip("\r\n")
        if lineno == 1:
            if not line.startswith("# geosent-lexicon"):
                raise FormatError("missing lexicon format line", name, "line 1")
            if line != _TSV_MAGIC:
                raise FormatError(f"unsupported lexicon format {line!r}", name, "line 1")
            continue
        if line.startswith("# countries="):
            countries = tuple(c for c in line.split("=", 1)[1].split(",") if c)
            continue
        if not line or line.startswith("#"):
            continue
        if not seen_header:
            if line != _TSV_HEADER:
                raise FormatError(f"expected header {_TSV_HEADER!r}", name, f"line {lineno}")
            seen_header = True
            continue
        cols = line.split("\t")
        if len(cols) != 3 or cols[2] not in KIND_PRIORITY:
            raise FormatError("expected surface<TAB>country<TAB>kind", name, f"line {lineno}")
        entries.add(LocationEntry(*cols))
    if countries is None:
        countries = tuple(sorted({e.country for e in entries}))
    return Lexicon(frozenset(entries), countries)
