"""Word-frequency lexicons on the Zipf scale.

A lexicon file is one ``word<TAB>zipf`` pair per line, zipf in [0, 9].
Lookups lowercase the query (Unicode-aware, no diacritic stripping) and
fall back to 0.0 for out-of-vocabulary words, i.e. unknown words count
as maximally rare.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

from .errors import LexiconError

#: Words with zipf below this are "low frequency".
LOW_FREQUENCY_THRESHOLD = 4.0

ZIPF_MIN = 0.0
ZIPF_MAX = 9.0


@dataclass(frozen=True)
class Lexicon:
    """Immutable word -> zipf frequency map with lowercase keys."""

    entries: dict[str, float]
    lang: str = "und"

    def zipf(self, word: str) -> float:
        """Zipf frequency of ``word``; 0.0 when out of vocabulary."""
        return self.entries.get(word.lower(), 0.0)

    def is_low_frequency(self, word: str) -> bool:
        return self.zipf(word) < LOW_FREQUENCY_THRESHOLD

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def _iter_lines(stream: str | TextIO | Iterable[str]) -> Iterator[str]:
    if isinstance(stream, str):
        yield from stream.splitlines()
    else:
        for line in stream:
            yield line.rstrip("\n")


def load_lexicon(stream: str | TextIO | Iterable[str], lang: str = "und") -> Lexicon:
    """Load a ``word<TAB>zipf`` lexicon, validating the zipf range.

    Later duplicate entries overwrite earlier ones; keys are lowercased on
    load so lookups are case-insensitive.
    """
    entries: dict[str, float] = {}
    for lineno, raw in enumerate(_iter_lines(stream), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise LexiconError(f"expected 'word<TAB>zipf', got {len(parts)} fields", lineno)
        word, value_str = parts
        if not word:
            raise LexiconError("empty word", lineno)
        try:
            value = float(value_str)
        except ValueError:
            raise LexiconError(f"non-numeric zipf value {value_str!r}", lineno) from None
        if not ZIPF_MIN <= value <= ZIPF_MAX:
            raise LexiconError(f"zipf value {value} outside [{ZIPF_MIN}, {ZIPF_MAX}]", lineno)
        entries[word.lower()] = value
    return Lexicon(entries=entries, lang=lang)
