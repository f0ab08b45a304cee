"""The 32 studied countries and their names in the external data sources."""

from __future__ import annotations

from typing import NamedTuple


class Country(NamedTuple):
    iso: str
    name: str  # short display name
    jhu_name: str  # "Country/Region" value in the JHU CSSE time-series CSVs


STUDY_COUNTRIES: tuple[Country, ...] = (
    Country("AU", "Australia", "Australia"),
    Country("BE", "Belgium", "Belgium"),
    Country("BR", "Brazil", "Brazil"),
    Country("CA", "Canada", "Canada"),
    Country("CL", "Chile", "Chile"),
    Country("CN", "China", "China"),
    Country("EC", "Ecuador", "Ecuador"),
    Country("FR", "France", "France"),
    Country("DE", "Germany", "Germany"),
    Country("IN", "India", "India"),
    Country("IR", "Iran", "Iran"),
    Country("IE", "Ireland", "Ireland"),
    Country("IT", "Italy", "Italy"),
    Country("JP", "Japan", "Japan"),
    Country("MX", "Mexico", "Mexico"),
    Country("NL", "Netherlands", "Netherlands"),
    Country("NZ", "New Zealand", "New Zealand"),
    Country("PK", "Pakistan", "Pakistan"),
    Country("PE", "Peru", "Peru"),
    Country("PT", "Portugal", "Portugal"),
    Country("QA", "Qatar", "Qatar"),
    Country("RU", "Russia", "Russia"),
    Country("SA", "Saudi Arabia", "Saudi Arabia"),
    Country("SG", "Singapore", "Singapore"),
    Country("KR", "South Korea", "Korea, South"),
    Country("ES", "Spain", "Spain"),
    Country("SE", "Sweden", "Sweden"),
    Country("CH", "Switzerland", "Switzerland"),
    Country("TR", "Turkey", "Turkey"),
    Country("AE", "UAE", "United Arab Emirates"),
    Country("GB", "UK", "United Kingdom"),
    Country("US", "USA", "US"),
)

STUDY_ISO_CODES: tuple[str, ...] = tuple(c.iso for c in STUDY_COUNTRIES)

_BY_ISO = {c.iso: c for c in STUDY_COUNTRIES}


def jhu_name(iso: str) -> str:
    """Return the JHU case-data name for ``iso``; unknown codes pass through."""
    c = _BY_ISO.get(iso)
    return c.jhu_name if c else iso
