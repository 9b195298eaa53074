"""Figure-mention detection, indexing, and source-text assembly.

A mention is a sentence that references a figure by its numeric label
("Figure 3", "Figs. 2 and 4", "fig. 5(a)").  Detection is rule based and
deliberately conservative: roman numerals, spelled-out numbers, letter
prefixed labels, and anaphora ("the previous figure") are not matched.
Word boundaries keep words like "configure" out, and a designator with no
number after it ("we figure out") never fires.

The mention index resolves detected labels to figure records of the same
paper and keeps mentions in document order, so "first mention" is well
defined.  Source texts for summarization are assembled from mentions:
the mention sentence itself, its paragraph, a sentence window clipped to
the paragraph, linearized OCR text, or combinations of those.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus, Document, FigureRecord
from .docparse import normalize_whitespace, ocr_text, segment_sentences
from .jsonio import iter_jsonl, write_jsonl
from .metrics import bleu4_corpus
from .rnd import derive_rng
from .tokenization import token_length

__all__ = [
    "FigureRef",
    "detect_figure_refs",
    "Mention",
    "MentionIndex",
    "build_mention_index",
    "WindowSpec",
    "extract_window",
    "SOURCE_ATOMS",
    "parse_source_kind",
    "SourceText",
    "build_source_text",
    "GoldSentence",
    "load_gold",
    "DetectorReport",
    "evaluate_detector",
    "write_mentions",
    "load_mentions",
    "OverlapCell",
    "mention_caption_overlap",
]

# A designator ("figure", "figures", "fig.", "figs.") followed by one or
# more numeric labels, optionally with subfigure letters, joined by commas
# or "and"/"&".
_LABEL_ATOM = r"\d{1,4}(?:[a-z]\b)?(?:\s*\(\s*[a-z0-9]{1,2}\s*\))?"
_REF_RE = re.compile(
    rf"\b(?P<designator>fig(?:ure)?s?)\.?\s*(?P<labels>{_LABEL_ATOM}(?:\s*(?:,|and|&)\s*{_LABEL_ATOM})*)",
    re.IGNORECASE,
)
_LABEL_RE = re.compile(r"\d{1,4}")


@dataclass(frozen=True)
class FigureRef:
    """One numeric figure reference found in a sentence."""

    label: int
    start: int
    end: int
    pattern_id: str


def detect_figure_refs(sentence_text: str) -> list[FigureRef]:
    """Find numeric figure references in one sentence."""
    refs: list[FigureRef] = []
    for match in _REF_RE.finditer(sentence_text):
        pattern_id = match.group("designator").lower()
        labels_start = match.start("labels")
        for label_match in _LABEL_RE.finditer(match.group("labels")):
            refs.append(
                FigureRef(
                    label=int(label_match.group()),
                    start=labels_start + label_match.start(),
                    end=labels_start + label_match.end(),
                    pattern_id=pattern_id,
                )
            )
    return refs


@dataclass(frozen=True)
class Mention:
    """A sentence referencing a figure, addressed by position."""

    figure_id: str
    paper_id: str
    paragraph_id: str
    paragraph_index: int
    sentence_index: int
    pattern_id: str


@dataclass(frozen=True)
class UnresolvedRef:
    """A detected label with no figure record in the same paper."""

    paper_id: str
    paragraph_id: str
    sentence_index: int
    label: int
    pattern_id: str


@dataclass
class MentionIndex:
    """Mentions per figure, in document order."""

    mentions: dict[str, tuple[Mention, ...]] = field(default_factory=dict)
    unresolved: tuple[UnresolvedRef, ...] = ()

    def for_figure(self, figure_id: str) -> tuple[Mention, ...]:
        return self.mentions.get(figure_id, ())

    def first_mention(self, figure_id: str) -> Mention | None:
        found = self.mentions.get(figure_id)
        return found[0] if found else None

    def figures_with_mentions(self) -> list[str]:
        return sorted(fid for fid, found in self.mentions.items() if found)


def build_mention_index(corpus: Corpus) -> MentionIndex:
    """Detect mentions across the corpus and resolve them to figures.

    A label maps to every figure of the paper carrying that label (several
    records can share a label when subfigures are stored separately).
    Labels with no matching figure are kept as unresolved references.
    """
    mentions: dict[str, list[Mention]] = {fid: [] for fid in corpus.figures}
    unresolved: list[UnresolvedRef] = []
    for paper_id in sorted(corpus.documents):
        doc = corpus.documents[paper_id]
        by_label: dict[int, list[str]] = {}
        for fid in doc.figure_ids:
            by_label.setdefault(corpus.figures[fid].figure_label, []).append(fid)
        for para_index, para in enumerate(doc.paragraphs):
            for sent_index, sentence in enumerate(para.sentences):
                for ref in detect_figure_refs(sentence.text):
                    targets = by_label.get(ref.label)
                    if not targets:
                        unresolved.append(
                            UnresolvedRef(
                                paper_id=paper_id,
                                paragraph_id=para.paragraph_id,
                                sentence_index=sent_index,
                                label=ref.label,
                                pattern_id=ref.pattern_id,
                            )
                        )
                        continue
                    for fid in sorted(targets):
                        mentions[fid].append(
                            Mention(
                                figure_id=fid,
                                paper_id=paper_id,
                                paragraph_id=para.paragraph_id,
                                paragraph_index=para_index,
                                sentence_index=sent_index,
                                pattern_id=ref.pattern_id,
                            )
                        )
    # A sentence citing the same label twice yields duplicate mentions;
    # keep the first occurrence of each (figure, sentence) pair.
    deduped: dict[str, tuple[Mention, ...]] = {}
    for fid, found in mentions.items():
        seen: set[tuple[str, int]] = set()
        kept: list[Mention] = []
        for m in found:
            key = (m.paragraph_id, m.sentence_index)
            if key not in seen:
                seen.add(key)
                kept.append(m)
        deduped[fid] = tuple(kept)
    return MentionIndex(mentions=deduped, unresolved=tuple(unresolved))


@dataclass(frozen=True)
class WindowSpec:
    """A sentence window: ``before`` preceding and ``after`` following
    sentences around the mention, clipped to the paragraph."""

    before: int
    after: int

    def __post_init__(self) -> None:
        if self.before < 0 or self.after < 0:
            raise ValueError(f"window sizes must be >= 0, got ({self.before}, {self.after})")


def extract_window(document: Document, mention: Mention, window: WindowSpec) -> str:
    """Join the window sentences around a mention with single spaces."""
    sentences = document.paragraph(mention.paragraph_id).sentences
    i = mention.sentence_index
    lo = max(0, i - window.before)
    hi = min(len(sentences), i + window.after + 1)
    return " ".join(s.text for s in sentences[lo:hi])


SOURCE_ATOMS = ("mention", "paragraph", "window", "ocr")


def parse_source_kind(kind: str) -> list[tuple[str, WindowSpec | None]]:
    """Parse a source-kind string like ``paragraph+ocr`` or ``window:1,2``."""
    atoms: list[tuple[str, WindowSpec | None]] = []
    for part in kind.strip().lower().split("+"):
        part = part.strip()
        if part.startswith("window"):
            match = re.fullmatch(r"window:(\d+),(\d+)", part)
            if not match:
                raise ValueError(
                    f"bad window source {part!r}; expected window:<before>,<after>"
                )
            atoms.append(("window", WindowSpec(int(match.group(1)), int(match.group(2)))))
        elif part in SOURCE_ATOMS:
            atoms.append((part, None))
        else:
            raise ValueError(
                f"unknown source kind {part!r}; expected one of {', '.join(SOURCE_ATOMS)}"
            )
    if not atoms:
        raise ValueError("empty source kind")
    return atoms


@dataclass(frozen=True)
class SourceText:
    """Assembled summarization input for one figure."""

    figure_id: str
    kind: str
    text: str
    token_length: int


def build_source_text(
    corpus: Corpus,
    index: MentionIndex,
    figure: FigureRecord,
    kind: str,
) -> SourceText | None:
    """Assemble the source text of the given kind for one figure.

    Returns None when the kind cannot be built: mention-derived parts
    need at least one detected mention, and a figure with no usable part
    has no source text.  Combination kinds join their parts with single
    spaces in the order written.
    """
    atoms = parse_source_kind(kind)
    document = corpus.documents[figure.paper_id]
    first = index.first_mention(figure.figure_id)
    parts: list[str] = []
    for atom, window in atoms:
        if atom == "ocr":
            text = ocr_text(figure.ocr_boxes)
            if text:
                parts.append(text)
            continue
        if first is None:
            return None
        if atom == "mention":
            text = extract_window(document, first, WindowSpec(0, 0))
        elif atom == "paragraph":
            text = document.paragraph(first.paragraph_id).text
        else:
            text = extract_window(document, first, window)
        if text:
            parts.append(text)
    text = " ".join(parts)
    if not text:
        return None
    return SourceText(
        figure_id=figure.figure_id,
        kind="+".join(
            f"window:{w.before},{w.after}" if atom == "window" else atom
            for atom, w in atoms
        ),
        text=text,
        token_length=token_length(text),
    )


# ---------------------------------------------------------------------------
# Detector evaluation against a gold sentence set
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GoldSentence:
    text: str
    labels: frozenset[int]


def load_gold(path: str | Path) -> list[GoldSentence]:
    """Read a gold TSV: sentence text, TAB, comma-separated labels.

    An empty second field means the sentence mentions no figure.  Lines
    starting with ``#`` and blank lines are skipped.
    """
    path = Path(path)
    rows: list[GoldSentence] = []
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ValueError(
                    f"{path}:{lineno}: expected 2 tab-separated fields, got {len(fields)}"
                )
            text, labels_field = fields
            labels: set[int] = set()
            for piece in labels_field.split(","):
                piece = piece.strip()
                if not piece:
                    continue
                try:
                    labels.add(int(piece))
                except ValueError:
                    raise ValueError(
                        f"{path}:{lineno}: bad label {piece!r}, expected an integer"
                    ) from None
            rows.append(GoldSentence(text=text, labels=frozenset(labels)))
    return rows


@dataclass(frozen=True)
class DetectorReport:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) else float("nan")

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else float("nan")


def evaluate_detector(gold: list[GoldSentence]) -> DetectorReport:
    """Score the rule detector on (sentence, label) pairs."""
    tp = fp = fn = 0
    for row in gold:
        predicted = {ref.label for ref in detect_figure_refs(row.text)}
        tp += len(predicted & row.labels)
        fp += len(predicted - row.labels)
        fn += len(row.labels - predicted)
    return DetectorReport(tp=tp, fp=fp, fn=fn)


# ---------------------------------------------------------------------------
# Mention file format
# ---------------------------------------------------------------------------


def write_mentions(index: MentionIndex, path: str | Path) -> None:
    """Write one row per figure with its ordered mention references."""
    rows = []
    for figure_id in sorted(index.mentions):
        rows.append(
            {
                "figure_id": figure_id,
                "mentions": [
                    {
                        "paragraph_id": m.paragraph_id,
                        "paragraph_index": m.paragraph_index,
                        "sentence_index": m.sentence_index,
                        "pattern_id": m.pattern_id,
                    }
                    for m in index.mentions[figure_id]
                ],
            }
        )
    write_jsonl(path, rows)


def load_mentions(path: str | Path, corpus: Corpus) -> MentionIndex:
    """Read a mentions file back into an index, validating references."""
    mentions: dict[str, tuple[Mention, ...]] = {fid: () for fid in corpus.figures}
    for lineno, record in iter_jsonl(path):
        where = f"{path}:{lineno}"
        figure_id = str(record.get("figure_id"))
        fig = corpus.figures.get(figure_id)
        if fig is None:
            raise ValueError(f"{where}: mentions for unknown figure {figure_id!r}")
        loaded = []
        for m in record.get("mentions", []):
            loaded.append(
                Mention(
                    figure_id=figure_id,
                    paper_id=fig.paper_id,
                    paragraph_id=str(m["paragraph_id"]),
                    paragraph_index=int(m["paragraph_index"]),
                    sentence_index=int(m["sentence_index"]),
                    pattern_id=str(m.get("pattern_id", "figure")),
                )
            )
        mentions[figure_id] = tuple(loaded)
    return MentionIndex(mentions=mentions, unresolved=())


# ---------------------------------------------------------------------------
# Mention / caption overlap grid
# ---------------------------------------------------------------------------

CANDIDATE_MODES = ("first-mention", "random-mention", "random-sentence")
REFERENCE_MODES = ("first-sentence", "whole")


@dataclass(frozen=True)
class OverlapCell:
    """Corpus BLEU-4 between mention-derived candidates and captions."""

    candidate_mode: str
    context_sentences: int
    reference_mode: str
    n_figures: int
    bleu4: float


def mention_caption_overlap(
    corpus: Corpus,
    index: MentionIndex,
    candidate_mode: str = "first-mention",
    context_sentences: int = 0,
    reference_mode: str = "first-sentence",
    seed: int = 0,
) -> OverlapCell:
    """Measure how much caption wording already appears around mentions.

    The candidate is a sentence plus ``context_sentences`` following
    sentences (clipped to its paragraph): the figure's first mention, a
    random mention, or a random sentence drawn from the whole document as
    a floor.  The reference is the caption's first sentence or the whole
    caption.  Random choices derive per-figure streams, so every grid
    cell sees the same draw for a given figure and seed.
    """
    if candidate_mode not in CANDIDATE_MODES:
        raise ValueError(
            f"unknown candidate mode {candidate_mode!r}; expected one of {CANDIDATE_MODES}"
        )
    if reference_mode not in REFERENCE_MODES:
        raise ValueError(
            f"unknown reference mode {reference_mode!r}; expected one of {REFERENCE_MODES}"
        )
    if context_sentences < 0:
        raise ValueError(f"context_sentences must be >= 0, got {context_sentences}")

    pairs: list[tuple[str, str]] = []
    for figure_id in sorted(corpus.figures):
        figure = corpus.figures[figure_id]
        document = corpus.documents[figure.paper_id]
        found = index.for_figure(figure_id)

        if candidate_mode == "random-sentence":
            pool = [
                (pi, si)
                for pi, para in enumerate(document.paragraphs)
                for si in range(len(para.sentences))
            ]
            if not pool:
                continue
            rng = derive_rng(seed, figure_id, "overlap-sentence")
            para_index, sent_index = pool[rng.randrange(len(pool))]
            para = document.paragraphs[para_index]
            hi = min(len(para.sentences), sent_index + context_sentences + 1)
            candidate = " ".join(s.text for s in para.sentences[sent_index:hi])
        else:
            if not found:
                continue
            if candidate_mode == "first-mention":
                mention = found[0]
            else:
                rng = derive_rng(seed, figure_id, "overlap-mention")
                mention = found[rng.randrange(len(found))]
            candidate = extract_window(
                document, mention, WindowSpec(0, context_sentences)
            )
        if not candidate:
            continue

        caption = normalize_whitespace(figure.caption_text)
        if reference_mode == "first-sentence":
            sentences = segment_sentences(caption)
            if not sentences:
                continue
            reference = sentences[0].text
        else:
            reference = caption
        pairs.append((candidate, reference))

    if not pairs:
        raise ValueError("no figures with usable candidate/reference pairs")
    return OverlapCell(
        candidate_mode=candidate_mode,
        context_sentences=context_sentences,
        reference_mode=reference_mode,
        n_figures=len(pairs),
        bleu4=bleu4_corpus(pairs),
    )
