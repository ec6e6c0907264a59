"""Document model and CoNLL-U / plain-text ingestion.

Sentences are immutable after construction and validated to be single-rooted
dependency trees, so they are safe to share across concurrent readers.
Multiword-token range lines (``1-2``) and empty nodes (``1.1``) are skipped;
columns beyond the six retained fields (FEATS, DEPS, MISC) are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

from .errors import ConlluParseError, TreeStructureError

#: The 17 universal POS tags plus "X" for unanalyzed plain text.
UPOS_TAGS = frozenset(
    "ADJ ADP ADV AUX CCONJ DET INTJ NOUN NUM PART PRON PROPN PUNCT SCONJ SYM VERB X".split()
)


@dataclass(frozen=True)
class Token:
    """One syntactic word. ``head`` is 0 for the root, None when the parse
    has been invalidated (scrambled text)."""

    index: int
    surface: str
    lemma: str
    upos: str
    head: int | None
    deprel: str | None

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"token index must be >= 1, got {self.index}")
        if not self.surface:
            raise ValueError("token surface must be non-empty")
        if self.head is not None:
            if self.head < 0:
                raise ValueError(f"token head must be >= 0, got {self.head}")
            if self.head == self.index:
                raise ValueError(f"token {self.index} cannot head itself")

    @property
    def char_length(self) -> int:
        """Length of the surface form in Unicode scalar values."""
        return len(self.surface)

    @property
    def is_punct(self) -> bool:
        return self.upos == "PUNCT"


@dataclass(frozen=True)
class Sentence:
    """A tokenized sentence, optionally carrying a dependency parse.

    When every token has a head, the head pointers must form a single tree:
    contiguous indices 1..n, exactly one root, every token reachable.
    """

    id: str
    tokens: tuple[Token, ...]
    lang: str = "und"
    text_id: str = ""

    def __post_init__(self):
        if not self.tokens:
            raise ValueError(f"sentence {self.id!r} has no tokens")
        for pos, tok in enumerate(self.tokens, start=1):
            if tok.index != pos:
                raise TreeStructureError(
                    f"token indices not contiguous (expected {pos}, got {tok.index})",
                    self.id,
                )
        if self.is_parsed:
            self._validate_tree()

    @property
    def is_parsed(self) -> bool:
        return all(tok.head is not None for tok in self.tokens)

    def _validate_tree(self):
        n = len(self.tokens)
        roots = [tok.index for tok in self.tokens if tok.head == 0]
        if len(roots) != 1:
            raise TreeStructureError(f"expected exactly one root, found {len(roots)}", self.id)
        for tok in self.tokens:
            if tok.head > n:
                raise TreeStructureError(
                    f"token {tok.index} heads out-of-range index {tok.head}", self.id
                )
        # walk each token to the root; a cycle never terminates at 0
        for tok in self.tokens:
            seen = set()
            cur = tok.index
            while cur != 0:
                if cur in seen:
                    raise TreeStructureError(f"cycle through token {cur}", self.id)
                seen.add(cur)
                cur = self.tokens[cur - 1].head
        return None

    @property
    def root_index(self) -> int:
        for tok in self.tokens:
            if tok.head == 0:
                return tok.index
        raise TreeStructureError("no root token", self.id)

    def non_punct_tokens(self) -> tuple[Token, ...]:
        return tuple(tok for tok in self.tokens if not tok.is_punct)

    def surface_text(self) -> str:
        """Whitespace-joined surfaces (detokenization is out of scope)."""
        return " ".join(tok.surface for tok in self.tokens)


@dataclass(frozen=True)
class Document:
    """An ordered collection of sentences from one source and language."""

    sentences: tuple[Sentence, ...]
    lang: str = "und"
    source: str = ""

    def __post_init__(self):
        seen: set[str] = set()
        for sent in self.sentences:
            if sent.id in seen:
                raise ValueError(f"duplicate sentence id {sent.id!r}")
            seen.add(sent.id)
            if sent.lang != self.lang:
                raise ValueError(
                    f"sentence {sent.id!r} has lang {sent.lang!r}, document has {self.lang!r}"
                )

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def by_id(self) -> dict[str, Sentence]:
        return {sent.id: sent for sent in self.sentences}


def _iter_lines(stream: str | TextIO | Iterable[str]) -> Iterator[str]:
    if isinstance(stream, str):
        yield from stream.splitlines()
    else:
        for line in stream:
            yield line.rstrip("\n")


def _is_range_or_empty_id(field0: str) -> bool:
    return "-" in field0 or "." in field0


def parse_conllu(stream: str | TextIO | Iterable[str], lang: str = "und",
                 source: str = "") -> Document:
    """Parse a CoNLL-U character stream into a Document.

    Sentence ids come from ``# sent_id =`` comments when present, otherwise
    ``<source>-s<ordinal>`` (or ``s<ordinal>`` without a source label).
    """
    sentences: list[Sentence] = []
    rows: list[tuple[int, list[str]]] = []
    sent_id: str | None = None
    ordinal = 0

    def flush(line_number: int):
        nonlocal rows, sent_id, ordinal
        if not rows and sent_id is None:
            return
        ordinal += 1
        sid = sent_id if sent_id is not None else (
            f"{source}-s{ordinal}" if source else f"s{ordinal}"
        )
        tokens = []
        for lineno, cols in rows:
            try:
                index = int(cols[0])
                head = None if cols[6] == "_" else int(cols[6])
            except ValueError as exc:
                raise ConlluParseError(f"non-integer id or head: {exc}", lineno) from None
            deprel = None if cols[7] == "_" else cols[7]
            try:
                tokens.append(
                    Token(index=index, surface=cols[1], lemma=cols[2],
                          upos=cols[3], head=head, deprel=deprel)
                )
            except ValueError as exc:
                raise ConlluParseError(str(exc), lineno) from None
        if not tokens:
            raise ConlluParseError("sentence block without token lines", line_number)
        sentences.append(Sentence(id=sid, tokens=tuple(tokens), lang=lang, text_id=source))
        rows = []
        sent_id = None

    lineno = 0
    for lineno, raw in enumerate(_iter_lines(stream), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            flush(lineno)
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("sent_id") and "=" in body:
                sent_id = body.split("=", 1)[1].strip()
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluParseError(f"expected 10 tab-separated columns, got {len(cols)}", lineno)
        if _is_range_or_empty_id(cols[0]):
            continue  # multiword range line or empty node
        rows.append((lineno, cols))
    flush(lineno + 1)
    return Document(sentences=tuple(sentences), lang=lang, source=source)


def parse_plaintext(stream: str | TextIO | Iterable[str], lang: str = "und",
                    source: str = "") -> Document:
    """Ingest plain text, one sentence per line, for gaze-only pipelines.

    Tokens are whitespace-separated, tagged ``X``, and hung on a flat tree
    (token 1 is the root, the rest attach to it).  A line may carry an
    explicit id as ``<sentence_id><TAB><text>``.
    """
    sentences = []
    ordinal = 0
    for raw in _iter_lines(stream):
        line = raw.strip()
        if not line:
            continue
        ordinal += 1
        if "\t" in line:
            sid, text = line.split("\t", 1)
            sid = sid.strip()
        else:
            sid, text = "", line
        if not sid:
            sid = f"{source}-s{ordinal}" if source else f"s{ordinal}"
        surfaces = text.split()
        if not surfaces:
            continue
        tokens = tuple(
            Token(index=i, surface=surf, lemma=surf.lower(), upos="X",
                  head=0 if i == 1 else 1, deprel="root" if i == 1 else "dep")
            for i, surf in enumerate(surfaces, start=1)
        )
        sentences.append(Sentence(id=sid, tokens=tokens, lang=lang, text_id=source))
    return Document(sentences=tuple(sentences), lang=lang, source=source)


def to_conllu(doc: Document) -> str:
    """Serialize the retained fields back to CoNLL-U (parse-preserving)."""
    blocks = []
    for sent in doc:
        lines = [f"# sent_id = {sent.id}"]
        for tok in sent.tokens:
            head = "_" if tok.head is None else str(tok.head)
            deprel = tok.deprel if tok.deprel is not None else "_"
            lines.append(
                "\t".join([str(tok.index), tok.surface, tok.lemma, tok.upos,
                           "_", "_", head, deprel, "_", "_"])
            )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def filter_min_length(doc: Document, min_tokens: int) -> Document:
    """Keep sentences with at least ``min_tokens`` non-punctuation tokens."""
    if min_tokens < 0:
        raise ValueError("min_tokens must be >= 0")
    kept = tuple(s for s in doc.sentences if len(s.non_punct_tokens()) >= min_tokens)
    return Document(sentences=kept, lang=doc.lang, source=doc.source)
