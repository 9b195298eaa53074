"""Generate the gold sentence set for detector evaluation.

300 synthetic sentences with hand-assigned gold figure labels, shaped so
the rule detector's confusion counts are fixed and meaningful:

* 178 sentences with one detectable reference and 30 with two (238 true
  positive pairs);
* 14 sentences whose references use forms the detector deliberately does
  not match (roman numerals, spelled-out numbers, letter-prefixed labels,
  anaphora) — the false negatives;
* 1 idiom sentence ("figure 8 pattern") the detector wrongly fires on —
  the false positive;
* 77 negatives with no figure reference at all.

The script runs the detector and refuses to write the file unless the
counts come out exactly tp=238, fp=1, fn=14.

Usage: python scripts/make_gold.py [out_path]
"""

from __future__ import annotations

import sys
from pathlib import Path

from figsumm.mentions import GoldSentence, evaluate_detector
from figsumm.rnd import derive_rng

SEED = 7

TOPICS = [
    "accuracy", "latency", "throughput", "convergence", "perplexity",
    "stability", "coverage", "recall", "precision", "robustness",
]
SUBJECTS = [
    "the encoder", "the decoder", "the planner", "the sampler",
    "the scheduler", "the cache", "the controller", "the ranker",
]
CONDITIONS = [
    "as depth grows", "under heavy load", "with more training data",
    "after the warmup phase", "across all batch sizes",
    "on the held-out pool", "with aggressive pruning",
]

SINGLE_TEMPLATES = [
    "Figure {n} shows the {topic} of {subject} {condition}.",
    "Fig. {n} plots {topic} against wall-clock time.",
    "figure {n} compares {subject} with the strongest baseline.",
    "As Figure {n} illustrates, {topic} saturates {condition}.",
    "The breakdown in Fig. {n} attributes most of the cost to {subject}.",
    "Fig. {n}(a) isolates the effect of {topic}.",
    "Figure {n}b repeats the analysis {condition}.",
    "We summarize the sweep in Figure {n}.",
    "Results improve monotonically, as shown in Fig. {n}.",
    "See Figure {n} for the corresponding ablation.",
]

DOUBLE_TEMPLATES = [
    "Figures {a} and {b} contrast {topic} before and after tuning.",
    "Figs. {a} and {b} show the same trend for {subject}.",
    "We compare Figure {a} and Figure {b} {condition}.",
    "The gap visible in Figures {a}, {b} widens {condition}.",
]

# Reference forms the detector does not match, with their gold labels.
FALSE_NEGATIVES = [
    ("Figure VIII summarizes the ablation over pruning rates.", [8]),
    ("Figure IV reports the throughput under sustained load.", [4]),
    ("Figure XII plots drift against training time.", [12]),
    ("Figure three shows the effect of aggressive pruning.", [3]),
    ("Figure seven compares both schedulers head to head.", [7]),
    ("Figure two plots coverage against depth.", [2]),
    ("Figure A.2 lists the hyperparameters we swept.", [2]),
    ("Figure C.1 illustrates the full serving pipeline.", [1]),
    ("Figure B.3 collects the remaining failure cases.", [3]),
    ("Figure A.1 defines the notation used throughout.", [1]),
    ("The previous figure makes the same point for recall.", [5]),
    ("This figure highlights the gap between the two pools.", [6]),
    ("The figure above traces one request through the cache.", [2]),
    ("As the figure on the next page shows, latency recovers.", [9]),
]

FALSE_POSITIVES = [
    ("The figure 8 pattern of the drone's trajectory repeats every lap.", []),
]

NEGATIVE_TEMPLATES = [
    "We configure {subject} for low latency.",
    "We figure out why {subject} stalls {condition}.",
    "The configuration of {subject} dominates the budget.",
    "We train for 100 epochs {condition}.",
    "{subject} processes 64 requests per batch.",
    "The {topic} of {subject} improves {condition}.",
    "Reconfiguring the pipeline removed the regression.",
    "A total of 12 annotators took part in the study.",
    "The queue holds at most 256 entries.",
    "Profiling attributes 40 percent of the time to {subject}.",
    "Our figures of merit are {topic} and cost.",
    "The disfigured checkpoint was discarded before analysis.",
]


def fill(template: str, rng, **labels) -> str:
    return template.format(
        topic=rng.choice(TOPICS),
        subject=rng.choice(SUBJECTS),
        condition=rng.choice(CONDITIONS),
        **labels,
    )


def build_rows() -> list[tuple[str, list[int]]]:
    rng = derive_rng(SEED, "gold")
    rows: list[tuple[str, list[int]]] = []
    for i in range(178):
        n = rng.randint(1, 30)
        template = SINGLE_TEMPLATES[i % len(SINGLE_TEMPLATES)]
        rows.append((fill(template, rng, n=n), [n]))
    for i in range(30):
        a = rng.randint(1, 15)
        b = a + rng.randint(1, 10)
        template = DOUBLE_TEMPLATES[i % len(DOUBLE_TEMPLATES)]
        rows.append((fill(template, rng, a=a, b=b), sorted({a, b})))
    rows.extend(FALSE_NEGATIVES)
    rows.extend(FALSE_POSITIVES)
    for i in range(77):
        template = NEGATIVE_TEMPLATES[i % len(NEGATIVE_TEMPLATES)]
        rows.append((fill(template, rng), []))
    rng.shuffle(rows)
    return rows


def main() -> None:
    out_path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data/gold/mentions_gold.tsv")
    rows = build_rows()
    assert len(rows) == 300, len(rows)
    gold = [GoldSentence(text=text, labels=frozenset(labels)) for text, labels in rows]
    report = evaluate_detector(gold)
    assert (report.tp, report.fp, report.fn) == (238, 1, 14), (
        f"unexpected confusion counts tp={report.tp} fp={report.fp} fn={report.fn}"
    )
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", encoding="utf-8") as handle:
        handle.write("# gold sentences for mention detection: text TAB comma-separated labels\n")
        for text, labels in rows:
            assert "\t" not in text
            handle.write(f"{text}\t{','.join(str(l) for l in labels)}\n")
    print(f"wrote {len(rows)} sentences to {out_path}")
    print(
        f"tp={report.tp} fp={report.fp} fn={report.fn}"
        f" precision={report.precision:.5f} recall={report.recall:.5f}"
    )


if __name__ == "__main__":
    main()
