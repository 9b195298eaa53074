"""Non-neural caption baselines.

Three families, all deterministic given a global seed:

* reuse: copy a source text verbatim (first mention sentence by default);
* random sentences: draw k distinct sentences from the figure's mention
  paragraph, without replacement, re-joined in document order;
* truncation: draw one random sentence and keep its first N tokens.

Randomness comes from derived streams keyed by the global seed, the
figure id, and the sampler setting, so predictions are independent of
iteration order and reproducible across runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus, FigureRecord
from .jsonio import iter_jsonl, write_jsonl
from .mentions import MentionIndex, build_source_text
from .rnd import derive_rng
from .tokenization import TokenizerConfig, tokenize

__all__ = [
    "PredictionRecord",
    "reuse_prediction",
    "random_sentence_prediction",
    "truncated_prediction",
    "run_reuse_baseline",
    "write_predictions",
    "load_predictions",
]

# Token split that preserves case, used when truncated text is re-joined.
_VERBATIM = TokenizerConfig(lowercase=False)


@dataclass(frozen=True)
class PredictionRecord:
    figure_id: str
    system_id: str
    text: str


def _mention_paragraph_sentences(corpus: Corpus, index: MentionIndex, figure: FigureRecord):
    first = index.first_mention(figure.figure_id)
    if first is None:
        return None
    document = corpus.documents[figure.paper_id]
    return document.paragraph(first.paragraph_id).sentences


def reuse_prediction(
    corpus: Corpus,
    index: MentionIndex,
    figure: FigureRecord,
    kind: str = "mention",
) -> PredictionRecord | None:
    """Copy the figure's source text of the given kind as the caption."""
    source = build_source_text(corpus, index, figure, kind)
    if source is None:
        return None
    return PredictionRecord(
        figure_id=figure.figure_id,
        system_id=f"reuse-{source.kind}",
        text=source.text,
    )


def random_sentence_prediction(
    corpus: Corpus,
    index: MentionIndex,
    figure: FigureRecord,
    k: int,
    seed: int,
) -> PredictionRecord | None:
    """Draw k distinct sentences from the mention paragraph.

    The draw is without replacement (k is clamped to the paragraph size)
    and the chosen sentences are joined in their document order.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    sentences = _mention_paragraph_sentences(corpus, index, figure)
    if sentences is None or not sentences:
        return None
    rng = derive_rng(seed, figure.figure_id, f"sent:{k}")
    chosen = sorted(rng.sample(range(len(sentences)), min(k, len(sentences))))
    return PredictionRecord(
        figure_id=figure.figure_id,
        system_id=f"random-sent-k{k}",
        text=" ".join(sentences[i].text for i in chosen),
    )


def truncated_prediction(
    corpus: Corpus,
    index: MentionIndex,
    figure: FigureRecord,
    target_tokens: int,
    seed: int,
) -> PredictionRecord | None:
    """Draw one random paragraph sentence and keep its first N tokens.

    Truncation happens in token space and the kept tokens are re-joined
    with single spaces, so the result never exceeds ``target_tokens``
    under the package tokenizer (it is shorter when the sentence is).
    """
    if target_tokens < 1:
        raise ValueError(f"target_tokens must be >= 1, got {target_tokens}")
    sentences = _mention_paragraph_sentences(corpus, index, figure)
    if sentences is None or not sentences:
        return None
    rng = derive_rng(seed, figure.figure_id, f"trunc:{target_tokens}")
    sentence = sentences[rng.randrange(len(sentences))]
    tokens = tokenize(sentence.text, _VERBATIM)
    return PredictionRecord(
        figure_id=figure.figure_id,
        system_id=f"random-trunc-t{target_tokens}",
        text=" ".join(tokens[:target_tokens]),
    )


def run_reuse_baseline(
    corpus: Corpus,
    index: MentionIndex,
    kind: str = "mention",
) -> list[PredictionRecord]:
    """Produce reuse predictions for every figure that supports the kind."""
    predictions = []
    for figure_id in sorted(corpus.figures):
        record = reuse_prediction(corpus, index, corpus.figures[figure_id], kind)
        if record is not None:
            predictions.append(record)
    return predictions


def write_predictions(predictions: list[PredictionRecord], path: str | Path) -> None:
    write_jsonl(
        path,
        (
            {"figure_id": p.figure_id, "system_id": p.system_id, "text": p.text}
            for p in predictions
        ),
    )


def load_predictions(path: str | Path) -> list[PredictionRecord]:
    records = []
    for lineno, row in iter_jsonl(path):
        where = f"{path}:{lineno}"
        for key in ("figure_id", "system_id", "text"):
            if key not in row:
                raise ValueError(f"{where}: missing required field {key!r}")
        records.append(
            PredictionRecord(
                figure_id=str(row["figure_id"]),
                system_id=str(row["system_id"]),
                text=str(row["text"]),
            )
        )
    return records
