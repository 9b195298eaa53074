"""Tokenizer pipeline, stopword lists, and the stemmer."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from figsumm.tokenization import (
    BASE_CONFIG,
    CONTENT_CONFIG,
    SCORING_CONFIG,
    StopwordListError,
    TokenizerConfig,
    available_stopword_lists,
    load_stopwords,
    porter_stem,
    token_length,
    tokenize,
)

# ---------------------------------------------------------------------------
# Pipeline basics
# ---------------------------------------------------------------------------


def test_running_cats_stems() -> None:
    assert tokenize("Running cats", SCORING_CONFIG) == ["run", "cat"]


def test_uppercase_lowered() -> None:
    assert tokenize("ABC", SCORING_CONFIG) == ["abc"]


def test_empty_text() -> None:
    assert tokenize("", SCORING_CONFIG) == []
    assert token_length("") == 0


def test_base_config_splits_punctuation() -> None:
    assert tokenize("Hello, world!", BASE_CONFIG) == ["hello", ",", "world", "!"]


def test_scoring_config_drops_punctuation() -> None:
    assert tokenize("Hello, world!", SCORING_CONFIG) == ["hello", "world"]


def test_content_config_drops_stopwords() -> None:
    tokens = tokenize("we observe that accuracy increases", CONTENT_CONFIG)
    assert tokens == [
        porter_stem("observe"),
        porter_stem("accuracy"),
        porter_stem("increases"),
    ]


def test_numbers_kept_whole() -> None:
    assert tokenize("3.5 of 12 runs", BASE_CONFIG) == ["3.5", "of", "12", "runs"]


def test_contractions_stay_single_tokens() -> None:
    assert tokenize("it's fine", BASE_CONFIG) == ["it's", "fine"]


def test_token_length_counts_punctuation() -> None:
    # Raw length is measured before any dropping: words and marks both count.
    assert token_length("Hello, world!") == 4
    assert token_length("The model (v2) converges.") == 7


def test_pipeline_order_lowercase_before_stopwords() -> None:
    # "The" only matches the stopword list after lowercasing.
    tokens = tokenize("The results", CONTENT_CONFIG)
    assert tokens == [porter_stem("results")]


def test_tokenize_idempotent_on_clean_text() -> None:
    config = TokenizerConfig(lowercase=True, drop_punctuation=True, stem=False)
    once = tokenize("plain lowercase words here", config)
    assert tokenize(" ".join(once), config) == once


@settings(max_examples=50, deadline=None)
@given(st.text(alphabet=st.characters(whitelist_categories=("Ll",), max_codepoint=0x7F), min_size=1))
def test_tokenize_join_idempotent_property(text: str) -> None:
    config = TokenizerConfig(lowercase=True, drop_punctuation=True, stem=False)
    once = tokenize(text, config)
    assert tokenize(" ".join(once), config) == once


# ---------------------------------------------------------------------------
# Config validation and stopword lists
# ---------------------------------------------------------------------------


def test_stopwords_require_punctuation_dropping() -> None:
    with pytest.raises(ValueError):
        TokenizerConfig(lowercase=True, drop_punctuation=False, stopword_list="english-v1")


def test_unknown_stopword_list_rejected() -> None:
    with pytest.raises(StopwordListError):
        load_stopwords("no-such-list")


def test_unknown_list_in_tokenize_rejected() -> None:
    config = TokenizerConfig(
        lowercase=True, drop_punctuation=True, stopword_list="missing-v9"
    )
    with pytest.raises(StopwordListError):
        tokenize("some text", config)


def test_english_v1_is_available() -> None:
    assert "english-v1" in available_stopword_lists()


def test_english_v1_contents() -> None:
    words = load_stopwords("english-v1")
    assert len(words) == 179
    for expected in ("the", "with", "we", "that", "as", "of"):
        assert expected in words
    assert all(w == w.lower() for w in words)


# ---------------------------------------------------------------------------
# Stemmer: reference vocabulary
# ---------------------------------------------------------------------------

# Input -> stem pairs covering each rewrite step and its guards.
STEM_VOCABULARY = {
    # plurals and -ed/-ing
    "caresses": "caress",
    "ponies": "poni",
    "ties": "ti",
    "caress": "caress",
    "cats": "cat",
    "feed": "feed",
    "agreed": "agre",
    "plastered": "plaster",
    "bled": "bled",
    "motoring": "motor",
    "sing": "sing",
    "conflated": "conflat",
    "troubled": "troubl",
    "sized": "size",
    "hopping": "hop",
    "tanned": "tan",
    "falling": "fall",
    "hissing": "hiss",
    "fizzed": "fizz",
    "failing": "fail",
    "filing": "file",
    # y -> i
    "happy": "happi",
    "sky": "sky",
    # double-suffix reductions
    "relational": "relat",
    "conditional": "condit",
    "rational": "ration",
    "valency": "valenc",
    "hesitancy": "hesit",
    "digitizer": "digit",
    "conformably": "conform",
    "radically": "radic",
    "differently": "differ",
    "vilely": "vile",
    "analogously": "analog",
    "vietnamization": "vietnam",
    "predication": "predic",
    "operator": "oper",
    "feudalism": "feudal",
    "decisiveness": "decis",
    "hopefulness": "hope",
    "callousness": "callous",
    "formality": "formal",
    "sensitivity": "sensit",
    "sensibility": "sensibl",
    # -ic- / -ful / -ness
    "triplicate": "triplic",
    "formative": "form",
    "formalize": "formal",
    "electricity": "electr",
    "electrical": "electr",
    "hopeful": "hope",
    "goodness": "good",
    # bare-suffix removal on long stems
    "revival": "reviv",
    "allowance": "allow",
    "inference": "infer",
    "airliner": "airlin",
    "gyroscopic": "gyroscop",
    "adjustable": "adjust",
    "defensible": "defens",
    "irritant": "irrit",
    "replacement": "replac",
    "adjustment": "adjust",
    "dependent": "depend",
    "adoption": "adopt",
    "communism": "commun",
    "activate": "activ",
    "homologous": "homolog",
    "effective": "effect",
    "bowdlerize": "bowdler",
    # final -e and -ll cleanup
    "probate": "probat",
    "rate": "rate",
    "cease": "ceas",
    "controlling": "control",
    "rolling": "roll",
    # typical scientific prose
    "accuracy": "accuraci",
    "increases": "increas",
    "experiments": "experi",
    "models": "model",
    "training": "train",
}


@pytest.mark.parametrize("word,expected", sorted(STEM_VOCABULARY.items()))
def test_stem_vocabulary(word: str, expected: str) -> None:
    assert porter_stem(word) == expected


def test_short_words_unchanged() -> None:
    for word in ("a", "is", "on", "be"):
        assert porter_stem(word) == word


def test_non_alphabetic_unchanged() -> None:
    for token in ("3.5", "2021", "x2", "!"):
        assert porter_stem(token) == token
