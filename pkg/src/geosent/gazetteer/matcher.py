"""Aho-Corasick gazetteer matcher over normalized text.

The automaton is a character trie with failure links computed breadth-first;
each state's output set is its own pattern plus the outputs of its failure
state, flattened at compile time so scanning never walks the suffix chain.
Scanning reports every occurrence; matches that start or end inside an
alphanumeric run are discarded, and the survivors are resolved leftmost-
longest without overlap.
"""

from __future__ import annotations

from collections import deque
from typing import NamedTuple

from ..errors import ArgumentError
from .lexicon import KIND_PRIORITY, Lexicon
from .normalize import normalize_text


class LocationTag(NamedTuple):
    country: str
    span: tuple[int, int]  # code-point offsets into the normalized text
    matched_surface: str
    kind: str
    source_span: tuple[int, int]  # offsets into the original text


class Matcher:
    """Compiled, immutable multi-pattern matcher. Safe to share between threads."""

    __slots__ = ("_goto", "_fail", "_out", "_surfaces", "_lengths", "_payload", "countries")

    def __init__(self, lex: Lexicon) -> None:
        if not lex.entries:
            raise ArgumentError("cannot compile a matcher from an empty lexicon")
        payload: dict[str, dict[str, str]] = {}
        for e in lex.sorted_entries():
            kinds = payload.setdefault(e.surface, {})
            prev = kinds.get(e.country)
            if prev is None or KIND_PRIORITY[e.kind] < KIND_PRIORITY[prev]:
                kinds[e.country] = e.kind

        surfaces = sorted(payload)
        self._surfaces = tuple(surfaces)
        self._lengths = tuple(len(s) for s in surfaces)
        # surface -> ((country, kind), ...) sorted by country
        self._payload = {s: tuple(sorted(payload[s].items())) for s in surfaces}
        self.countries = lex.countries

        goto: list[dict[str, int]] = [{}]
        own: list[int] = [-1]
        for pid, s in enumerate(surfaces):
            state = 0
            for ch in s:
                nxt = goto[state].get(ch)
                if nxt is None:
                    nxt = len(goto)
                    goto.append({})
                    own.append(-1)
                    goto[state][ch] = nxt
                state = nxt
            own[state] = pid

        fail = [0] * len(goto)
        out: list[tuple[int, ...]] = [()] * len(goto)
        queue = deque()
        for child in goto[0].values():
            queue.append(child)
        while queue:
            state = queue.popleft()
            f = fail[state]
            out[state] = ((own[state],) if own[state] >= 0 else ()) + out[f]
            for ch, child in goto[state].items():
                queue.append(child)
                g = f
                while ch not in goto[g] and g:
                    g = fail[g]
                target = goto[g].get(ch, 0)
                fail[child] = target if target != child else 0

        self._goto = tuple(goto)
        self._fail = tuple(fail)
        self._out = tuple(out)

    def __len__(self) -> int:
        return len(self._surfaces)

    @property
    def n_states(self) -> int:
        return len(self._goto)

    def find_all(self, text: str) -> list[tuple[int, int, int]]:
        """Every occurrence ``(start, end, pattern_id)``, boundaries ignored."""
        goto, fail, out, lengths = self._goto, self._fail, self._out, self._lengths
        state = 0
        hits = []
        for i, ch in enumerate(text):
            nxt = goto[state].get(ch)
            while nxt is None and state:
                state = fail[state]
                nxt = goto[state].get(ch)
            state = nxt or 0
            if out[state]:
                end = i + 1
                for pid in out[state]:
                    hits.append((end - lengths[pid], end, pid))
        return hits

    def match(self, text: str) -> list[tuple[int, int, str]]:
        """Leftmost-longest, non-overlapping, token-bounded matches in normalized ``text``."""
        n = len(text)
        cands = []
        for s, e, pid in self.find_all(text):
            if s > 0 and text[s - 1].isalnum():
                continue
            if e < n and text[e].isalnum():
                continue
            cands.append((s, -e, pid))
        if not cands:
            return []
        cands.sort()
        chosen = []
        last_end = 0
        for s, neg_e, pid in cands:
            if s >= last_end:
                chosen.append((s, -neg_e, self._surfaces[pid]))
                last_end = -neg_e
        return chosen

    def payload(self, surface: str) -> tuple[tuple[str, str], ...]:
        return self._payload.get(surface, ())

    def tag(self, text: str) -> list[LocationTag]:
        return tag_locations(self, text)


def compile_matcher(lex: Lexicon) -> Matcher:
    return Matcher(lex)


def tag_locations(m: Matcher, text: str) -> list[LocationTag]:
    """Tag every place mention in ``text`` with the country (or countries) owning it.

    An ambiguous surface produces one tag per owning country, all sharing one
    span. Tags are ordered by span start, then country code.
    """
    norm = normalize_text(text)
    tags = []
    for s, e, surface in m.match(norm.text):
        src = norm.source_span(s, e)
        for country, kind in m.payload(surface):
            tags.append(LocationTag(country, (s, e), surface, kind, src))
    return tags


def countries_of(tags: list[LocationTag]) -> frozenset[str]:
    return frozenset(t.country for t in tags)
