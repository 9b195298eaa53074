"""Generate the bundled synthetic fixture corpus.

Fifty small invented papers with figures, captions, OCR boxes, and a
paper-level split assignment.  Everything is derived from fixed seeds, so
re-running this script reproduces data/fixture byte for byte.  The text
is templated nonsense about made-up systems; it exists to exercise the
pipeline, not to mean anything.

Usage: python scripts/make_fixture.py [out_dir]
"""

from __future__ import annotations

import sys
from pathlib import Path

from figsumm.corpus import (
    Corpus,
    Document,
    FigureRecord,
    OcrBox,
    Paragraph,
    apply_split,
    resplit_by_paper,
    write_corpus,
)
from figsumm.docparse import segment_sentences
from figsumm.rnd import derive_rng

SEED = 42

TOPICS = [
    "accuracy", "latency", "throughput", "convergence", "perplexity",
    "stability", "coverage", "recall", "precision", "robustness",
    "calibration", "utilization", "agreement", "drift", "sparsity",
]
SUBJECTS = [
    "the encoder", "the decoder", "the planner", "the sampler",
    "the retrieval module", "the scheduler", "the cache", "the controller",
    "the segmenter", "the ranker", "the verifier", "the allocator",
]
VERBS = [
    "improves", "degrades", "saturates", "stabilizes", "increases",
    "decreases", "plateaus", "recovers", "fluctuates", "dominates",
]
CONDITIONS = [
    "as depth grows", "under heavy load", "with more training data",
    "after the warmup phase", "when the budget is tight",
    "across all batch sizes", "on the held-out pool", "near the capacity limit",
    "with aggressive pruning", "once the queue drains",
]
EXTRAS = [
    "We report the median of five runs",
    "Error bars denote one standard deviation",
    "The dashed line marks the MATH threshold",
    "Shaded regions show the interquartile range",
    "All values are averaged over three trials",
    "Lower is better in every panel",
]
OCR_WORDS = [
    "0", "20", "40", "60", "80", "100", "epochs", "steps", "baseline",
    "ours", "loss", "score", "time", "size", "rate",
]


def sentence(rng) -> str:
    subject = rng.choice(SUBJECTS)
    verb = rng.choice(VERBS)
    condition = rng.choice(CONDITIONS)
    topic = rng.choice(TOPICS)
    forms = [
        f"{subject.capitalize()} {verb} {condition}.",
        f"The {topic} of {subject} {verb} {condition}.",
        f"We find that {topic} {verb} {condition}.",
        f"In this setting {subject} {verb}, and {topic} follows {condition}.",
        f"Across seeds the {topic} {verb} {condition}, which matches our expectation"
        f" that {subject} is the bottleneck.",
    ]
    return rng.choice(forms)


def mention_sentence(rng, labels: list[int], topic: str) -> str:
    verb = rng.choice(VERBS)
    condition = rng.choice(CONDITIONS)
    if len(labels) == 2:
        designator = rng.choice(
            [f"Figures {labels[0]} and {labels[1]}", f"Figs. {labels[0]} and {labels[1]}"]
        )
    else:
        label = labels[0]
        designator = rng.choice(
            [f"Figure {label}", f"Fig. {label}", f"figure {label}", f"Fig. {label}(a)"]
        )
    return f"{designator} shows how {topic} {verb} {condition}."


def caption(rng, topic: str, long: bool) -> str:
    subject = rng.choice(SUBJECTS)
    verb = rng.choice(VERBS)
    condition = rng.choice(CONDITIONS)
    text = f"The {topic} of {subject} {verb} {condition}."
    if long:
        while len(text.split()) < 28:
            text += f" {rng.choice(EXTRAS)} for {rng.choice(TOPICS)} {rng.choice(CONDITIONS)}."
    elif rng.random() < 0.5:
        text += f" {rng.choice(EXTRAS)}."
    return text


def make_ocr(rng) -> list[OcrBox]:
    boxes = []
    n_rows = rng.randint(2, 4)
    for row in range(n_rows):
        y = 20.0 + 60.0 * row + rng.random() * 4.0
        for col in range(rng.randint(2, 4)):
            x = 15.0 + 70.0 * col + rng.random() * 6.0
            boxes.append(OcrBox(x=x, y=y, w=40.0, h=12.0, text=rng.choice(OCR_WORDS)))
    rng.shuffle(boxes)
    return boxes


def build_corpus() -> Corpus:
    documents: dict[str, Document] = {}
    figures: dict[str, FigureRecord] = {}
    for paper_index in range(50):
        paper_id = f"paper{paper_index:04d}"
        rng = derive_rng(SEED, "fixture", paper_id)
        n_figures = rng.randint(1, 4)
        fig_labels = list(range(1, n_figures + 1))
        fig_topics = {label: rng.choice(TOPICS) for label in fig_labels}

        # Which figures go unmentioned (roughly 15%)?
        unmentioned = {label for label in fig_labels if rng.random() < 0.15}
        # A pair of figures cited in one sentence now and then.
        paired = (
            tuple(rng.sample(fig_labels, 2))
            if len(fig_labels) >= 2 and rng.random() < 0.3
            else None
        )

        paragraphs: list[list[str]] = []
        n_paragraphs = rng.randint(3, 6)
        for _ in range(n_paragraphs):
            paragraphs.append([sentence(rng) for _ in range(rng.randint(3, 7))])

        mention_plan: list[tuple[list[int], str]] = []
        if paired is not None and not (set(paired) & unmentioned):
            mention_plan.append((sorted(paired), fig_topics[paired[0]]))
            remaining = [l for l in fig_labels if l not in paired and l not in unmentioned]
        else:
            remaining = [l for l in fig_labels if l not in unmentioned]
        mention_plan.extend(([label], fig_topics[label]) for label in remaining)

        for labels, topic in mention_plan:
            para_index = rng.randrange(n_paragraphs)
            sent_index = rng.randrange(len(paragraphs[para_index]) + 1)
            paragraphs[para_index].insert(sent_index, mention_sentence(rng, labels, topic))
            # Mentioned figures sometimes get a second, later mention.
            if len(labels) == 1 and rng.random() < 0.25:
                extra_para = rng.randrange(n_paragraphs)
                paragraphs[extra_para].append(
                    mention_sentence(rng, labels, fig_topics[labels[0]])
                )

        para_objects = [
            Paragraph(
                paragraph_id=f"p{i}",
                text=" ".join(sentences),
                sentences=segment_sentences(" ".join(sentences)),
            )
            for i, sentences in enumerate(paragraphs)
        ]
        documents[paper_id] = Document(
            paper_id=paper_id,
            title=f"On the {rng.choice(TOPICS)} of {rng.choice(SUBJECTS)}",
            abstract=" ".join(sentence(rng) for _ in range(3)),
            paragraphs=tuple(para_objects),
        )

        for label in fig_labels:
            figure_id = f"{paper_id}-fig{label}"
            long_caption = rng.random() < 0.4
            figures[figure_id] = FigureRecord(
                figure_id=figure_id,
                paper_id=paper_id,
                figure_label=label,
                caption_text=caption(rng, fig_topics[label], long_caption),
                ocr_boxes=tuple(make_ocr(rng)) if rng.random() < 0.6 else (),
            )

    corpus = Corpus(documents=documents, figures=figures)
    # Re-derive figure id lists the same way the loader does.
    for paper_id, doc in documents.items():
        figs = sorted(
            (f for f in figures.values() if f.paper_id == paper_id),
            key=lambda f: (f.figure_label, f.figure_id),
        )
        documents[paper_id] = Document(
            paper_id=doc.paper_id,
            title=doc.title,
            abstract=doc.abstract,
            paragraphs=doc.paragraphs,
            figure_ids=tuple(f.figure_id for f in figs),
        )
    corpus = Corpus(documents=documents, figures=figures)
    return apply_split(corpus, resplit_by_paper(corpus, seed=SEED))


def main() -> None:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data/fixture")
    corpus = build_corpus()
    write_corpus(corpus, out_dir)
    n_long = sum(
        1 for f in corpus.figures.values() if f.caption_token_length >= 30
    )
    print(f"wrote {len(corpus.documents)} papers, {len(corpus.figures)} figures to {out_dir}")
    print(f"figures with OCR: {sum(1 for f in corpus.figures.values() if f.ocr_boxes)}")
    print(f"captions with >= 30 tokens: {n_long}")


if __name__ == "__main__":
    main()
