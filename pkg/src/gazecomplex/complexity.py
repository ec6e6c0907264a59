"""Structural complexity features of parsed sentences.

Nine features in a fixed canonical order, grouped into LENGTH, FREQUENCY,
and STRUCTURAL blocks so regressions can be run on any subset.  Punctuation
tokens are excluded from every count except tree depth, where they ride
along on the tree they attach to.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .corpus import Document, Sentence, Token
from .errors import DegenerateInputError, SchemaError, UnparsedSentenceError
from .lexicon import Lexicon

#: Canonical feature order; every vector and matrix follows it.
FEATURE_NAMES: tuple[str, ...] = (
    "sentence_length",
    "avg_word_length",
    "avg_word_frequency",
    "n_low_frequency_words",
    "lexical_density",
    "parse_tree_depth",
    "avg_dep_link_length",
    "max_dep_link_length",
    "n_verbal_heads",
)

#: Open-class tags counted as content words for lexical density.
CONTENT_UPOS = frozenset({"NOUN", "PROPN", "VERB", "ADJ", "ADV"})


class FeatureGroup(enum.Enum):
    """Named feature subsets for group-wise regressions."""

    LENGTH = ("sentence_length", "avg_word_length")
    FREQUENCY = ("avg_word_frequency", "n_low_frequency_words")
    STRUCTURAL = (
        "lexical_density",
        "parse_tree_depth",
        "avg_dep_link_length",
        "max_dep_link_length",
        "n_verbal_heads",
    )
    ALL = FEATURE_NAMES

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.value

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(FEATURE_NAMES.index(name) for name in self.value)

    @classmethod
    def from_name(cls, name: str) -> "FeatureGroup":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown feature group {name!r}") from None


@dataclass(frozen=True)
class ComplexityProfile:
    """The nine feature values for one sentence."""

    sentence_id: str
    sentence_length: int
    avg_word_length: float
    avg_word_frequency: float
    n_low_frequency_words: int
    lexical_density: float
    parse_tree_depth: int
    avg_dep_link_length: float
    max_dep_link_length: int
    n_verbal_heads: int

    def as_dict(self) -> dict[str, float]:
        return {name: float(getattr(self, name)) for name in FEATURE_NAMES}

    def as_vector(self, group: FeatureGroup = FeatureGroup.ALL) -> tuple[float, ...]:
        return tuple(float(getattr(self, name)) for name in group.feature_names)


def _tree_depth(sentence: Sentence) -> int:
    """Number of nodes on the longest root-to-token path (root alone = 1)."""
    depths: dict[int, int] = {}

    def depth_of(index: int) -> int:
        if index == 0:
            return 0
        if index not in depths:
            depths[index] = 1 + depth_of(sentence.tokens[index - 1].head)
        return depths[index]

    return max(depth_of(tok.index) for tok in sentence.tokens)


def _dependency_links(sentence: Sentence) -> list[int]:
    """Linear distances |dependent - head| for non-root, non-PUNCT tokens."""
    return [
        abs(tok.index - tok.head)
        for tok in sentence.tokens
        if tok.head != 0 and not tok.is_punct
    ]


def _count_verbal_heads(sentence: Sentence) -> int:
    """Tokens that govern at least one dependent and act as a verb: either
    tagged VERB, or a nonverbal predicate carrying a copula dependent."""
    dependents: dict[int, list[Token]] = {}
    for tok in sentence.tokens:
        if tok.head and tok.head > 0:
            dependents.setdefault(tok.head, []).append(tok)
    count = 0
    for tok in sentence.tokens:
        children = dependents.get(tok.index, [])
        if not children:
            continue
        if tok.upos == "VERB" or any((c.deprel or "").split(":")[0] == "cop" for c in children):
            count += 1
    return count


def profile(sentence: Sentence, lexicon: Lexicon) -> ComplexityProfile:
    """Compute all nine features for one parsed sentence.

    Raises UnparsedSentenceError for sentences without head pointers
    (e.g. scrambled text) and DegenerateInputError for punctuation-only
    sentences, where the word-level means are undefined.
    """
    if not sentence.is_parsed:
        raise UnparsedSentenceError(
            f"sentence {sentence.id!r} has no dependency parse; "
            "only surface features are available"
        )
    words = sentence.non_punct_tokens()
    if not words:
        raise DegenerateInputError(f"sentence {sentence.id!r} has no non-punctuation tokens")

    zipfs = [lexicon.zipf(tok.surface) for tok in words]
    links = _dependency_links(sentence)
    return ComplexityProfile(
        sentence_id=sentence.id,
        sentence_length=len(words),
        avg_word_length=sum(tok.char_length for tok in words) / len(words),
        # fsum: exactly rounded, so the value is independent of token order
        avg_word_frequency=math.fsum(zipfs) / len(zipfs),
        n_low_frequency_words=sum(lexicon.is_low_frequency(tok.surface) for tok in words),
        lexical_density=sum(tok.upos in CONTENT_UPOS for tok in words) / len(words),
        parse_tree_depth=_tree_depth(sentence),
        avg_dep_link_length=(sum(links) / len(links)) if links else 0.0,
        max_dep_link_length=max(links) if links else 0,
        n_verbal_heads=_count_verbal_heads(sentence),
    )


def surface_features(sentence: Sentence, lexicon: Lexicon) -> dict[str, float]:
    """Features computable without a parse: the LENGTH and FREQUENCY groups
    plus lexical density (POS tags travel with tokens)."""
    words = sentence.non_punct_tokens()
    if not words:
        raise DegenerateInputError(f"sentence {sentence.id!r} has no non-punctuation tokens")
    zipfs = [lexicon.zipf(tok.surface) for tok in words]
    return {
        "sentence_length": float(len(words)),
        "avg_word_length": sum(tok.char_length for tok in words) / len(words),
        # fsum: exactly rounded, so the value is independent of token order
        "avg_word_frequency": math.fsum(zipfs) / len(zipfs),
        "n_low_frequency_words": float(
            sum(lexicon.is_low_frequency(tok.surface) for tok in words)
        ),
        "lexical_density": sum(tok.upos in CONTENT_UPOS for tok in words) / len(words),
    }


def profile_document(doc: Document, lexicon: Lexicon) -> tuple[ComplexityProfile, ...]:
    """Profile every sentence, preserving corpus order."""
    return tuple(profile(sent, lexicon) for sent in doc)


def feature_matrix(profiles: "tuple[ComplexityProfile, ...] | list[ComplexityProfile]",
                   group: FeatureGroup = FeatureGroup.ALL) -> np.ndarray:
    """Stack profiles into an (n_sentences, n_features) float matrix."""
    return np.array([p.as_vector(group) for p in profiles], dtype=float)


_INT_FEATURES = frozenset({
    "sentence_length", "n_low_frequency_words", "parse_tree_depth",
    "max_dep_link_length", "n_verbal_heads",
})


def profiles_to_csv(profiles: Sequence[ComplexityProfile]) -> str:
    """Render profiles as CSV: sentence_id plus the nine canonical columns."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("sentence_id",) + FEATURE_NAMES)
    for p in profiles:
        row = [p.sentence_id]
        for name in FEATURE_NAMES:
            value = getattr(p, name)
            row.append(str(value) if name in _INT_FEATURES else repr(float(value)))
        writer.writerow(row)
    return buf.getvalue()


def profiles_from_csv(stream: str | TextIO) -> tuple[ComplexityProfile, ...]:
    """Parse the profiles_to_csv format back, order preserved."""
    text = stream if isinstance(stream, str) else stream.read()
    reader = csv.DictReader(io.StringIO(text))
    present = set(reader.fieldnames or ())
    missing = [c for c in ("sentence_id",) + FEATURE_NAMES if c not in present]
    if missing:
        raise SchemaError(f"missing column(s): {', '.join(missing)}")
    profiles = []
    for row in reader:
        kwargs = {"sentence_id": row["sentence_id"]}
        for name in FEATURE_NAMES:
            try:
                value = float(row[name])
            except (TypeError, ValueError):
                raise SchemaError(f"non-numeric {name} in row {row!r}") from None
            kwargs[name] = int(round(value)) if name in _INT_FEATURES else value
        profiles.append(ComplexityProfile(**kwargs))
    return tuple(profiles)
