"""Text normalization shared by the lexicon builder and the matcher.

Normalization case-folds, strips diacritics, treats ``#``/``@`` sigils as
whitespace (so ``#Paris#Rome`` reads as two words) and collapses whitespace
runs to one space (none at either end). The normalized
string is produced with whole-string operations; the per-character offset
map back to the source is only built when someone asks for it, since most
texts never need it.
"""

from __future__ import annotations

import re
import unicodedata
from bisect import bisect_right

SIGILS = "#@"

# letters NFKD leaves alone but with an obvious ASCII reading
_EXTRA_FOLDS = {
    "ø": "o", "đ": "d", "ł": "l", "ħ": "h", "ı": "i", "æ": "ae", "œ": "oe",
    "þ": "th", "ð": "d", "ŋ": "n", "ŧ": "t", "ĸ": "k", "ſ": "s",
    "‘": "'", "’": "'", "ʼ": "'",
}


class _FoldTable(dict):
    """``str.translate`` table: drops combining marks, applies extra folds.

    Filled on demand so only characters actually seen are ever classified.
    """

    def __missing__(self, cp: int):
        ch = chr(cp)
        if unicodedata.combining(ch):
            val = None
        else:
            val = _EXTRA_FOLDS.get(ch, cp)
        self[cp] = val
        return val


_FOLD = _FoldTable()


def fold_char(c: str) -> str:
    """Case-fold one character and strip any diacritics it carries."""
    s = c.casefold()
    if s.isascii():
        return s
    return unicodedata.normalize("NFKD", s).translate(_FOLD)


def _fold(text: str) -> str:
    if text.isascii():
        return text.lower()
    s = text.casefold()
    if s.isascii():
        return s
    return unicodedata.normalize("NFKD", s).translate(_FOLD)


def _fast_text(text: str) -> str:
    s = _fold(text)
    if "#" in s or "@" in s:
        s = s.replace("#", " ").replace("@", " ")
    return " ".join(s.split())


class OffsetMap:
    """Normalized position -> source position.

    Stored as runs ``(norm_start, src_start, length)`` inside which positions
    correspond one-to-one. A source character that folds to several
    characters (``ß`` -> ``ss``) yields several runs pointing at it; a
    collapsed space points at the first whitespace (or sigil) character of
    its run.
    """

    __slots__ = ("_runs", "_starts", "_len")

    def __init__(self, runs: list[tuple[int, int, int]], norm_len: int) -> None:
        self._runs = runs
        self._starts = [r[0] for r in runs]
        self._len = norm_len

    def __len__(self) -> int:
        return self._len

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self._len
        if not 0 <= i < self._len:
            raise IndexError(i)
        ns, ss, _ = self._runs[bisect_right(self._starts, i) - 1]
        return ss + i - ns

    def to_list(self) -> list[int]:
        return [self[i] for i in range(self._len)]

    def source_span(self, start: int, end: int) -> tuple[int, int]:
        """Smallest source ``[s, e)`` that produced normalized ``[start, end)``."""
        if not 0 <= start < end <= self._len:
            raise ValueError(f"bad span [{start}, {end})")
        return self[start], self[end - 1] + 1


_CHUNK = re.compile(r"[^\s#@]+")
# printable ASCII other than whitespace and sigils: folds one-to-one
_ASCII_RUN = re.compile(r"[^\s#@\x80-\U0010ffff]+")


def _build_offsets(text: str) -> tuple[str, OffsetMap]:
    """Normalize ``text`` again, this time recording source positions.

    Runs of plain ASCII map one-to-one; only the characters between them
    (whitespace, sigils, anything non-ASCII) are folded one at a time.
    """
    out: list[str] = []
    runs: list[tuple[int, int, int]] = []
    pos = 0
    space_at = -1

    def gap(lo: int, hi: int) -> None:
        nonlocal pos, space_at
        for i in range(lo, hi):
            c = text[i]
            if c == " " or c in SIGILS:
                if pos and space_at < 0:
                    space_at = i
                continue
            for ch in fold_char(c):
                if ch.isspace() or ch in SIGILS:
                    if pos and space_at < 0:
                        space_at = i
                    continue
                if space_at >= 0:
                    _push(runs, pos, space_at, 1)
                    out.append(" ")
                    pos += 1
                    space_at = -1
                _push(runs, pos, i, 1)
                out.append(ch)
                pos += 1

    prev = 0
    for m in _ASCII_RUN.finditer(text):
        s, e = m.span()
        if s > prev:
            gap(prev, s)
        if space_at >= 0:
            _push(runs, pos, space_at, 1)
            out.append(" ")
            pos += 1
            space_at = -1
        _push(runs, pos, s, e - s)
        out.append(text[s:e].lower())
        pos += e - s
        prev = e
    gap(prev, len(text))
    return "".join(out), OffsetMap(runs, pos)


def _push(runs: list[tuple[int, int, int]], pos: int, src: int, ln: int) -> None:
    if runs:
        ns, ss, pl = runs[-1]
        if ns + pl == pos and ss + pl == src:
            runs[-1] = (ns, ss, pl + ln)
            return
    runs.append((pos, src, ln))


class Normalized:
    """A normalized string plus a (lazily built) map back to its source."""

    __slots__ = ("text", "source", "_offsets", "_chunks")

    def __init__(self, text: str, source: str) -> None:
        self.text = text
        self.source = source
        self._offsets = None
        self._chunks = None

    @property
    def offsets(self) -> OffsetMap:
        if self._offsets is None:
            slow_text, self._offsets = _build_offsets(self.source)
            if slow_text != self.text:  # pragma: no cover - guarded by property tests
                raise AssertionError(f"normalization paths disagree on {self.source!r}")
        return self._offsets

    def source_span(self, start: int, end: int) -> tuple[int, int]:
        """Source ``[s, e)`` that produced normalized ``[start, end)``."""
        if not 0 <= start < end <= len(self.text):
            raise ValueError(f"bad span [{start}, {end})")
        if self._offsets is not None or not _folds_one_to_one(self.source):
            return self.offsets.source_span(start, end)
        # the non-space normalized chars are exactly the source chars outside
        # whitespace/sigils, in order
        if self._chunks is None:
            starts, ranks = [], []
            r = 0
            for m in _CHUNK.finditer(self.source):
                starts.append(m.start())
                ranks.append(r)
                r += m.end() - m.start()
            self._chunks = (starts, ranks)
        return self._ascii_pos(start), self._ascii_pos(end - 1) + 1

    def _ascii_pos(self, p: int) -> int:
        starts, ranks = self._chunks
        if self.text[p] == " ":
            # a collapsed space maps to the first whitespace/sigil after the
            # preceding chunk; the preceding char is never a space
            return _first_space(self.source, self._ascii_pos(p - 1) + 1)
        r = p - self.text.count(" ", 0, p)
        k = bisect_right(ranks, r) - 1
        return starts[k] + r - ranks[k]

    def __iter__(self):
        yield self.text
        yield self.offsets

    def __repr__(self) -> str:
        return f"Normalized({self.text!r})"


_NON_ASCII = re.compile(r"[^\x00-\x7f]")


def _folds_one_to_one(text: str) -> bool:
    """True if every non-ASCII char of ``text`` that is not whitespace folds
    to exactly one character that is neither whitespace nor a sigil."""
    if text.isascii():
        return True
    for c in set(_NON_ASCII.findall(text)):
        if c.isspace():
            continue
        f = fold_char(c)
        if len(f) != 1 or f.isspace() or f in SIGILS:
            return False
    return True


def _first_space(s: str, i: int) -> int:
    while not (s[i].isspace() or s[i] in SIGILS):
        i += 1
    return i


def normalize_text(text: str) -> Normalized:
    """Normalize ``text`` for gazetteer matching.

    >>> normalize_text("São  #Paulo").text
    'sao paulo'
    """
    return Normalized(_fast_text(text), text)


def normalize_name(name: str) -> str:
    """Normalized surface form of a place name."""
    return _fast_text(name)
