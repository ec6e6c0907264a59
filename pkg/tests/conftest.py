"""Shared fixtures: the reference corpus files and small builders."""

from __future__ import annotations

import os

import pytest

from gazecomplex.corpus import parse_conllu
from gazecomplex.lexicon import load_lexicon

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "data")


def data_path(*parts: str) -> str:
    return os.path.join(DATA_DIR, *parts)


def read_data(*parts: str) -> str:
    with open(data_path(*parts), "r", encoding="utf-8") as fh:
        return fh.read()


@pytest.fixture(scope="session")
def reference_docs():
    return {
        lang: parse_conllu(read_data("janus", f"{lang}.conllu"), lang=lang)
        for lang in ("en", "fi", "tr")
    }


@pytest.fixture(scope="session")
def reference_lexicons():
    return {
        lang: load_lexicon(read_data("lexicons", f"{lang}.tsv"), lang=lang)
        for lang in ("en", "fi", "tr")
    }
