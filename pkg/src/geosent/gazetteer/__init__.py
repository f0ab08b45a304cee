"""Content-based location tagging against a GeoNames lexicon."""

from .lexicon import (
    GeoNamesSources,
    Lexicon,
    LocationEntry,
    build_lexicon,
    default_blocklist,
    parse_blocklist,
    read_lexicon,
    write_lexicon,
)
from .matcher import LocationTag, Matcher, compile_matcher, countries_of, tag_locations
from .normalize import Normalized, OffsetMap, normalize_name, normalize_text

__all__ = [
    "GeoNamesSources", "Lexicon", "LocationEntry", "LocationTag", "Matcher", "Normalized",
    "OffsetMap", "build_lexicon", "compile_matcher", "countries_of", "default_blocklist",
    "normalize_name", "normalize_text", "parse_blocklist", "read_lexicon", "tag_locations",
    "write_lexicon",
]
