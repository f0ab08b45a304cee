import io

import pytest

import synth
from geosent.gazetteer import GeoNamesSources, build_lexicon, compile_matcher, default_blocklist


@pytest.fixture(scope="session")
def fixture_lexicon():
    return build_lexicon(GeoNamesSources.from_dir(synth.FIXTURE_GEONAMES), synth.FIXTURE_COUNTRIES,
                         default_blocklist())


@pytest.fixture(scope="session")
def fixture_matcher(fixture_lexicon):
    return compile_matcher(fixture_lexicon)


@pytest.fixture
def jsonl():
    def make(*lines):
        return io.BytesIO(("\n".join(lines) + "\n").encode("utf-8"))
    return make


# acceptance results, repeated in the terminal summary so they show without -s
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
