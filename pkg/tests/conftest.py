"""Shared fixtures: the bundled corpus, its mention index, and paths."""

from __future__ import annotations

from pathlib import Path

import pytest

from figsumm.corpus import Corpus, load_corpus
from figsumm.mentions import MentionIndex, build_mention_index

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURE_DIR = REPO_ROOT / "data" / "fixture"
GOLD_PATH = REPO_ROOT / "data" / "gold" / "mentions_gold.tsv"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def gold_path() -> Path:
    return GOLD_PATH


@pytest.fixture(scope="session")
def corpus() -> Corpus:
    return load_corpus(FIXTURE_DIR)


@pytest.fixture(scope="session")
def mention_index(corpus: Corpus) -> MentionIndex:
    return build_mention_index(corpus)
