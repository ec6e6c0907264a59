"""Word-order randomization for the order-sensitivity control.

Scrambling permutes whole tokens (the surface keeps its POS tag and lemma),
renumbers them 1..n, and drops the dependency annotations: a scrambled
sentence has no parse, so structural features are an error downstream, not
a silent zero.  Corpus scrambling derives one seed per sentence from the
top-level seed and a stable hash of the sentence id, so output is
deterministic and independent of corpus order.
"""

from __future__ import annotations

import zlib

import numpy as np

from .corpus import Document, Sentence, Token

SCRAMBLE_SUFFIX = "-scrambled"


def _derived_seed(seed: int, sentence_id: str) -> int:
    return (seed ^ zlib.crc32(sentence_id.encode("utf-8"))) & 0xFFFFFFFF


def scramble_sentence(sentence: Sentence, seed: int,
                      pin_final_punct: bool = False) -> Sentence:
    """Seeded uniform shuffle of the tokens; parse invalidated, id suffixed.

    ``pin_final_punct`` keeps a sentence-final punctuation token in place for
    encoders sensitive to terminal punctuation.
    """
    tokens = sentence.tokens
    pinned_tail: tuple[Token, ...] = ()
    if pin_final_punct and tokens and tokens[-1].is_punct:
        pinned_tail = (tokens[-1],)
        tokens = tokens[:-1]
    order = np.random.default_rng(seed).permutation(len(tokens))
    shuffled = tuple(tokens[int(i)] for i in order) + pinned_tail
    renumbered = tuple(
        Token(index=i, surface=tok.surface, lemma=tok.lemma, upos=tok.upos,
              head=None, deprel=None)
        for i, tok in enumerate(shuffled, start=1)
    )
    return Sentence(
        id=sentence.id + SCRAMBLE_SUFFIX,
        tokens=renumbered,
        lang=sentence.lang,
        text_id=sentence.text_id,
    )


def scramble_corpus(doc: Document, seed: int,
                    pin_final_punct: bool = False) -> Document:
    """Scramble every sentence under a per-sentence derived seed."""
    scrambled = tuple(
        scramble_sentence(sent, _derived_seed(seed, sent.id), pin_final_punct)
        for sent in doc
    )
    return Document(sentences=scrambled, lang=doc.lang, source=doc.source)
