"""Reuse baselines and seeded random predictions."""

from __future__ import annotations

import random

import pytest

from figsumm.baselines import (
    PredictionRecord,
    load_predictions,
    random_sentence_prediction,
    reuse_prediction,
    run_reuse_baseline,
    truncated_prediction,
    write_predictions,
)
from figsumm.corpus import Corpus
from figsumm.mentions import MentionIndex
from figsumm.tokenization import token_length

# ---------------------------------------------------------------------------
# Reuse
# ---------------------------------------------------------------------------


def test_reuse_mention_inside_paragraph(corpus: Corpus, mention_index: MentionIndex) -> None:
    checked = 0
    for figure_id in mention_index.figures_with_mentions():
        figure = corpus.figures[figure_id]
        mention = reuse_prediction(corpus, mention_index, figure, "mention")
        paragraph = reuse_prediction(corpus, mention_index, figure, "paragraph")
        assert mention is not None and paragraph is not None
        assert mention.text in paragraph.text
        checked += 1
    assert checked == 109


def test_reuse_system_ids(corpus: Corpus, mention_index: MentionIndex) -> None:
    figure_id = mention_index.figures_with_mentions()[0]
    figure = corpus.figures[figure_id]
    assert reuse_prediction(corpus, mention_index, figure, "mention").system_id == "reuse-mention"
    record = reuse_prediction(corpus, mention_index, figure, "window:1,1")
    assert record.system_id == "reuse-window:1,1"


def test_reuse_unmentioned_figure_is_none(corpus: Corpus, mention_index: MentionIndex) -> None:
    missing = sorted(set(corpus.figures) - set(mention_index.figures_with_mentions()))
    figure = corpus.figures[missing[0]]
    assert reuse_prediction(corpus, mention_index, figure, "mention") is None


def test_run_reuse_baseline_unique_keys(corpus: Corpus, mention_index: MentionIndex) -> None:
    records = run_reuse_baseline(corpus, mention_index, "mention")
    keys = [(r.figure_id, r.system_id) for r in records]
    assert len(keys) == len(set(keys))
    assert len(records) == 109


# ---------------------------------------------------------------------------
# Random sentences
# ---------------------------------------------------------------------------


def _mentioned_figure(corpus: Corpus, index: MentionIndex, position: int = 0):
    figure_id = index.figures_with_mentions()[position]
    return corpus.figures[figure_id]


def test_random_sentences_deterministic(corpus: Corpus, mention_index: MentionIndex) -> None:
    figure = _mentioned_figure(corpus, mention_index)
    a = random_sentence_prediction(corpus, mention_index, figure, k=2, seed=7)
    b = random_sentence_prediction(corpus, mention_index, figure, k=2, seed=7)
    assert a == b
    c = random_sentence_prediction(corpus, mention_index, figure, k=2, seed=8)
    assert a is not None and c is not None


def test_random_sentences_without_replacement(
    corpus: Corpus, mention_index: MentionIndex
) -> None:
    # k beyond the paragraph size returns each sentence exactly once.
    for position in range(10):
        figure = _mentioned_figure(corpus, mention_index, position)
        record = random_sentence_prediction(corpus, mention_index, figure, k=50, seed=1)
        assert record is not None
        mention = mention_index.first_mention(figure.figure_id)
        document = corpus.documents[figure.paper_id]
        paragraph = document.paragraph(mention.paragraph_id)
        assert record.text == " ".join(s.text for s in paragraph.sentences)


def test_random_sentences_document_order(corpus: Corpus, mention_index: MentionIndex) -> None:
    figure = _mentioned_figure(corpus, mention_index, 3)
    mention = mention_index.first_mention(figure.figure_id)
    document = corpus.documents[figure.paper_id]
    sentence_texts = [s.text for s in document.paragraph(mention.paragraph_id).sentences]
    for seed in range(10):
        record = random_sentence_prediction(corpus, mention_index, figure, k=2, seed=seed)
        assert record is not None
        positions = []
        cursor = 0
        remaining = record.text
        for text in sentence_texts:
            if remaining.startswith(text):
                positions.append(cursor)
                remaining = remaining[len(text) :].lstrip()
            cursor += 1
        assert not remaining, record.text
        assert positions == sorted(positions)


def test_random_sentences_k_validation(corpus: Corpus, mention_index: MentionIndex) -> None:
    figure = _mentioned_figure(corpus, mention_index)
    with pytest.raises(ValueError):
        random_sentence_prediction(corpus, mention_index, figure, k=0, seed=0)


# ---------------------------------------------------------------------------
# Truncations
# ---------------------------------------------------------------------------


def test_truncation_never_exceeds_target(corpus: Corpus, mention_index: MentionIndex) -> None:
    rng = random.Random(11)
    figures = mention_index.figures_with_mentions()
    for _ in range(200):
        figure = corpus.figures[rng.choice(figures)]
        target = rng.choice([1, 2, 4, 6, 10, 16, 30])
        seed = rng.randrange(100)
        record = truncated_prediction(corpus, mention_index, figure, target, seed)
        assert record is not None
        assert token_length(record.text) <= target


def test_truncation_deterministic(corpus: Corpus, mention_index: MentionIndex) -> None:
    figure = _mentioned_figure(corpus, mention_index, 5)
    a = truncated_prediction(corpus, mention_index, figure, 10, seed=3)
    b = truncated_prediction(corpus, mention_index, figure, 10, seed=3)
    assert a == b
    assert a.system_id == "random-trunc-t10"


def test_truncation_target_validation(corpus: Corpus, mention_index: MentionIndex) -> None:
    figure = _mentioned_figure(corpus, mention_index)
    with pytest.raises(ValueError):
        truncated_prediction(corpus, mention_index, figure, 0, seed=0)


def test_truncation_prefix_of_sentence(corpus: Corpus, mention_index: MentionIndex) -> None:
    # A large target keeps one paragraph sentence whole: the output is
    # that sentence's full token sequence, re-joined with single spaces.
    from figsumm.tokenization import TokenizerConfig, tokenize

    verbatim = TokenizerConfig(lowercase=False)
    figure = _mentioned_figure(corpus, mention_index, 2)
    record = truncated_prediction(corpus, mention_index, figure, 10_000, seed=4)
    mention = mention_index.first_mention(figure.figure_id)
    document = corpus.documents[figure.paper_id]
    rejoined = {
        " ".join(tokenize(s.text, verbatim))
        for s in document.paragraph(mention.paragraph_id).sentences
    }
    assert record.text in rejoined


# ---------------------------------------------------------------------------
# Prediction files
# ---------------------------------------------------------------------------


def test_predictions_round_trip(tmp_path) -> None:
    records = [
        PredictionRecord(figure_id="F1", system_id="reuse-mention", text="Alpha beta."),
        PredictionRecord(figure_id="F2", system_id="reuse-mention", text="Gamma delta."),
    ]
    path = tmp_path / "predictions.jsonl"
    write_predictions(records, path)
    assert load_predictions(path) == records


def test_load_predictions_error_location(tmp_path) -> None:
    path = tmp_path / "predictions.jsonl"
    path.write_text('{"figure_id": "F1"}\n', encoding="utf-8")
    with pytest.raises(ValueError) as err:
        load_predictions(path)
    assert "predictions.jsonl:1" in str(err.value)
