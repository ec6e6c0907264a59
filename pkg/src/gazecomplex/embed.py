"""Fixed-dimension sentence embeddings keyed by sentence id.

This is the boundary to external encoders: anything that can write the
one-line-per-sentence TSV format below can feed the pipeline.

    #dim=<d>\\t#provenance=<string>
    <sentence_id>\\t<v1> <v2> ... <vd>

Values are rendered with 9 significant digits, which keeps the read/write
round trip within 1e-6 relative error.  Rows are written in lexicographic
sentence-id order so output is a deterministic function of the set.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .errors import AlignmentError, EmbeddingFormatError


@dataclass(frozen=True)
class EmbeddingSet:
    """Immutable map sentence_id -> vector, all of one dimension."""

    dim: int
    vectors: dict[str, np.ndarray]
    provenance: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise EmbeddingFormatError(f"dim must be >= 1, got {self.dim}")
        for sid, vec in self.vectors.items():
            if vec.shape != (self.dim,):
                raise EmbeddingFormatError(
                    f"vector for {sid!r} has {vec.shape[0]} components, expected {self.dim}"
                )
            if not np.all(np.isfinite(vec)):
                raise EmbeddingFormatError(f"non-finite component in vector for {sid!r}")

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, sentence_id: str) -> bool:
        return sentence_id in self.vectors

    def ids(self) -> frozenset[str]:
        return frozenset(self.vectors)


def read_embeddings(stream: str | TextIO) -> EmbeddingSet:
    """Parse an embedding file, taking dim and provenance from the header."""
    lines = stream.splitlines() if isinstance(stream, str) else [
        line.rstrip("\n") for line in stream
    ]
    if not lines or not lines[0].startswith("#dim="):
        raise EmbeddingFormatError("missing '#dim=' header line")
    header_parts = lines[0].split("\t")
    try:
        dim = int(header_parts[0][len("#dim="):])
    except ValueError:
        raise EmbeddingFormatError(f"non-integer dim in header {lines[0]!r}") from None
    provenance = ""
    if len(header_parts) > 1 and header_parts[1].startswith("#provenance="):
        provenance = header_parts[1][len("#provenance="):]

    vectors: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if "\t" not in line:
            raise EmbeddingFormatError(f"line {lineno}: expected '<id><TAB><components>'")
        sid, payload = line.split("\t", 1)
        if sid in vectors:
            raise EmbeddingFormatError(f"duplicate sentence id {sid!r}")
        parts = payload.split(" ")
        if len(parts) != dim:
            raise EmbeddingFormatError(
                f"vector for {sid!r} has {len(parts)} components, expected {dim}"
            )
        try:
            vec = np.array([float(p) for p in parts], dtype=float)
        except ValueError:
            raise EmbeddingFormatError(f"non-numeric component for {sid!r}") from None
        if not np.all(np.isfinite(vec)):
            raise EmbeddingFormatError(f"non-finite component in vector for {sid!r}")
        vectors[sid] = vec
    return EmbeddingSet(dim=dim, vectors=vectors, provenance=provenance)


def write_embeddings(embeddings: EmbeddingSet, sink: TextIO | None = None) -> str:
    """Serialize the set; returns the text and writes it to ``sink`` if given."""
    if "\t" in embeddings.provenance or "\n" in embeddings.provenance:
        raise EmbeddingFormatError("provenance must not contain tabs or newlines")
    out = [f"#dim={embeddings.dim}\t#provenance={embeddings.provenance}"]
    for sid in sorted(embeddings.vectors):
        components = " ".join("%.9g" % v for v in embeddings.vectors[sid])
        out.append(f"{sid}\t{components}")
    text = "\n".join(out) + "\n"
    if sink is not None:
        sink.write(text)
    return text


@dataclass(frozen=True)
class AlignedData:
    """Embeddings joined to per-sentence targets on the id intersection."""

    ids: tuple[str, ...]
    X: np.ndarray  # (n, dim)
    Y: np.ndarray  # (n,) or (n, T)
    missing_targets: frozenset[str]  # ids with embeddings but no target
    missing_embeddings: frozenset[str]  # ids with targets but no embedding


def align(
    embeddings: EmbeddingSet,
    targets: Mapping[str, float | Sequence[float] | np.ndarray],
) -> AlignedData:
    """Join on sentence id, rows in sorted-id order; report both gaps."""
    shared = sorted(embeddings.ids() & set(targets))
    if not shared:
        raise AlignmentError("no sentence ids shared between embeddings and targets")
    X = np.array([embeddings.vectors[sid] for sid in shared], dtype=float)
    Y = np.array([targets[sid] for sid in shared], dtype=float)
    return AlignedData(
        ids=tuple(shared),
        X=X,
        Y=Y,
        missing_targets=frozenset(embeddings.ids() - set(targets)),
        missing_embeddings=frozenset(set(targets) - embeddings.ids()),
    )
