"""Corpus model and on-disk layout.

A corpus directory holds four files:

* ``papers.jsonl``   one record per paper: id, title, abstract, paragraphs
* ``figures.jsonl``  one record per figure: id, paper id, label, caption
* ``ocr.jsonl``      optional: OCR boxes per figure
* ``splits.json``    optional: paper id to train/val/test assignment

Loading cross-links everything and fails loudly on referential problems
(duplicate ids, figures pointing at unknown papers, OCR rows for unknown
figures), always naming the file and line.  Splits are assigned per paper
so no paper ever straddles two splits; figures inherit their paper's
split.  Writing a loaded corpus back out reproduces it field for field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .jsonio import dumps_canonical, iter_jsonl
from .rnd import derive_rng
from .tokenization import token_length

__all__ = [
    "SPLITS",
    "UNASSIGNED",
    "CorpusError",
    "Sentence",
    "Paragraph",
    "Document",
    "OcrBox",
    "FigureRecord",
    "Corpus",
    "load_corpus",
    "write_corpus",
    "resplit_by_paper",
    "apply_split",
    "filter_better",
]

SPLITS = ("train", "val", "test")
UNASSIGNED = "unassigned"


class CorpusError(ValueError):
    """Raised when corpus files are structurally or referentially invalid."""


@dataclass(frozen=True)
class Sentence:
    """One sentence with its character span in the owning paragraph."""

    text: str
    start: int
    end: int


@dataclass(frozen=True)
class Paragraph:
    paragraph_id: str
    text: str
    sentences: tuple[Sentence, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "sentences", tuple(self.sentences))


@dataclass(frozen=True)
class Document:
    paper_id: str
    title: str
    abstract: str
    paragraphs: tuple[Paragraph, ...] = ()
    figure_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "paragraphs", tuple(self.paragraphs))
        object.__setattr__(self, "figure_ids", tuple(self.figure_ids))

    def paragraph(self, paragraph_id: str) -> Paragraph:
        for para in self.paragraphs:
            if para.paragraph_id == paragraph_id:
                return para
        raise KeyError(f"paper {self.paper_id} has no paragraph {paragraph_id}")


@dataclass(frozen=True)
class OcrBox:
    """One recognized text box; coordinates in image pixels."""

    x: float
    y: float
    w: float
    h: float
    text: str


@dataclass(frozen=True)
class FigureRecord:
    figure_id: str
    paper_id: str
    figure_label: int
    caption_text: str
    image_path: str | None = None
    ocr_boxes: tuple[OcrBox, ...] = ()
    split: str = UNASSIGNED

    def __post_init__(self) -> None:
        object.__setattr__(self, "ocr_boxes", tuple(self.ocr_boxes))
        if self.figure_label < 1:
            raise ValueError(
                f"figure {self.figure_id}: figure_label must be >= 1, got {self.figure_label}"
            )
        if not self.caption_text.strip():
            raise ValueError(f"figure {self.figure_id}: caption_text must be non-empty")
        if self.split not in SPLITS and self.split != UNASSIGNED:
            raise ValueError(f"figure {self.figure_id}: unknown split {self.split!r}")

    @property
    def caption_token_length(self) -> int:
        return token_length(self.caption_text)


@dataclass
class Corpus:
    """Cross-linked documents and figures, keyed by their ids."""

    documents: dict[str, Document] = field(default_factory=dict)
    figures: dict[str, FigureRecord] = field(default_factory=dict)
    splits: dict[str, str] = field(default_factory=dict)

    def figures_for_paper(self, paper_id: str) -> list[FigureRecord]:
        doc = self.documents[paper_id]
        return [self.figures[fid] for fid in doc.figure_ids]

    def figure_ids(self) -> list[str]:
        return sorted(self.figures)

    def in_split(self, split: str) -> list[FigureRecord]:
        return [self.figures[fid] for fid in self.figure_ids() if self.figures[fid].split == split]


def _require(record: dict, key: str, where: str):
    if key not in record:
        raise CorpusError(f"{where}: missing required field {key!r}")
    return record[key]


def load_corpus(data_dir: str | Path) -> Corpus:
    """Load and cross-link a corpus directory."""
    data_dir = Path(data_dir)
    papers_path = data_dir / "papers.jsonl"
    figures_path = data_dir / "figures.jsonl"
    if not papers_path.exists():
        raise CorpusError(f"{papers_path}: file not found")
    if not figures_path.exists():
        raise CorpusError(f"{figures_path}: file not found")

    # Imported here: docparse depends on the types defined above.
    from .docparse import segment_sentences

    documents: dict[str, Document] = {}
    for lineno, record in iter_jsonl(papers_path):
        where = f"{papers_path}:{lineno}"
        paper_id = str(_require(record, "paper_id", where))
        if paper_id in documents:
            raise CorpusError(f"{where}: duplicate paper_id {paper_id!r}")
        paragraphs = []
        seen_pids: set[str] = set()
        for para in record.get("paragraphs", []):
            pid = str(_require(para, "paragraph_id", where))
            text = str(_require(para, "text", where))
            if pid in seen_pids:
                raise CorpusError(f"{where}: duplicate paragraph_id {pid!r}")
            seen_pids.add(pid)
            paragraphs.append(
                Paragraph(paragraph_id=pid, text=text, sentences=segment_sentences(text))
            )
        documents[paper_id] = Document(
            paper_id=paper_id,
            title=str(record.get("title", "")),
            abstract=str(record.get("abstract", "")),
            paragraphs=tuple(paragraphs),
        )

    splits: dict[str, str] = {}
    splits_path = data_dir / "splits.json"
    if splits_path.exists():
        try:
            raw_splits = json.loads(splits_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{splits_path}: malformed JSON ({exc.msg})") from None
        if not isinstance(raw_splits, dict):
            raise CorpusError(f"{splits_path}: expected an object mapping paper_id to split")
        for paper_id, split in raw_splits.items():
            if paper_id not in documents:
                raise CorpusError(f"{splits_path}: split assigned to unknown paper {paper_id!r}")
            if split not in SPLITS:
                raise CorpusError(
                    f"{splits_path}: paper {paper_id!r} has unknown split {split!r}"
                    f" (expected one of {', '.join(SPLITS)})"
                )
            splits[paper_id] = split

    figures: dict[str, FigureRecord] = {}
    for lineno, record in iter_jsonl(figures_path):
        where = f"{figures_path}:{lineno}"
        figure_id = str(_require(record, "figure_id", where))
        paper_id = str(_require(record, "paper_id", where))
        if figure_id in figures:
            raise CorpusError(f"{where}: duplicate figure_id {figure_id!r}")
        if paper_id not in documents:
            raise CorpusError(f"{where}: figure {figure_id!r} references unknown paper {paper_id!r}")
        try:
            figures[figure_id] = FigureRecord(
                figure_id=figure_id,
                paper_id=paper_id,
                figure_label=int(_require(record, "figure_label", where)),
                caption_text=str(_require(record, "caption_text", where)),
                image_path=record.get("image_path"),
                split=splits.get(paper_id, UNASSIGNED),
            )
        except ValueError as exc:
            raise CorpusError(f"{where}: {exc}") from None

    ocr_path = data_dir / "ocr.jsonl"
    if ocr_path.exists():
        for lineno, record in iter_jsonl(ocr_path):
            where = f"{ocr_path}:{lineno}"
            figure_id = str(_require(record, "figure_id", where))
            fig = figures.get(figure_id)
            if fig is None:
                raise CorpusError(f"{where}: OCR boxes for unknown figure {figure_id!r}")
            boxes = tuple(
                OcrBox(
                    x=float(_require(box, "x", where)),
                    y=float(_require(box, "y", where)),
                    w=float(_require(box, "w", where)),
                    h=float(_require(box, "h", where)),
                    text=str(_require(box, "text", where)),
                )
                for box in record.get("boxes", [])
            )
            figures[figure_id] = replace(fig, ocr_boxes=boxes)

    by_paper: dict[str, list[FigureRecord]] = {pid: [] for pid in documents}
    for fig in figures.values():
        by_paper[fig.paper_id].append(fig)
    for paper_id, figs in by_paper.items():
        ordered = sorted(figs, key=lambda f: (f.figure_label, f.figure_id))
        documents[paper_id] = replace(
            documents[paper_id], figure_ids=tuple(f.figure_id for f in ordered)
        )

    return Corpus(documents=documents, figures=figures, splits=splits)


def write_corpus(corpus: Corpus, out_dir: str | Path) -> None:
    """Write a corpus back to its directory layout (deterministic bytes)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    with (out_dir / "papers.jsonl").open("w", encoding="utf-8") as handle:
        for paper_id in sorted(corpus.documents):
            doc = corpus.documents[paper_id]
            handle.write(
                dumps_canonical(
                    {
                        "paper_id": doc.paper_id,
                        "title": doc.title,
                        "abstract": doc.abstract,
                        "paragraphs": [
                            {"paragraph_id": p.paragraph_id, "text": p.text}
                            for p in doc.paragraphs
                        ],
                    }
                )
                + "\n"
            )

    with (out_dir / "figures.jsonl").open("w", encoding="utf-8") as handle:
        for figure_id in sorted(corpus.figures):
            fig = corpus.figures[figure_id]
            row = {
                "figure_id": fig.figure_id,
                "paper_id": fig.paper_id,
                "figure_label": fig.figure_label,
                "caption_text": fig.caption_text,
            }
            if fig.image_path is not None:
                row["image_path"] = fig.image_path
            handle.write(dumps_canonical(row) + "\n")

    ocr_rows = [
        {
            "figure_id": fid,
            "boxes": [
                {"x": b.x, "y": b.y, "w": b.w, "h": b.h, "text": b.text}
                for b in corpus.figures[fid].ocr_boxes
            ],
        }
        for fid in sorted(corpus.figures)
        if corpus.figures[fid].ocr_boxes
    ]
    if ocr_rows:
        with (out_dir / "ocr.jsonl").open("w", encoding="utf-8") as handle:
            for row in ocr_rows:
                handle.write(dumps_canonical(row) + "\n")

    if corpus.splits:
        (out_dir / "splits.json").write_text(
            json.dumps(corpus.splits, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )


def resplit_by_paper(
    corpus: Corpus,
    seed: int,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
) -> dict[str, str]:
    """Partition papers (not figures) into train/val/test.

    Papers are shuffled with a derived stream, then cut at cumulative
    ratio boundaries, so each split size deviates from the exact ratio by
    at most one paper and every figure of a paper lands in the same split.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise ValueError(f"ratios must be three non-negative numbers, got {ratios!r}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)!r}")

    paper_ids = sorted(corpus.documents)
    rng = derive_rng(seed, "resplit")
    rng.shuffle(paper_ids)

    n = len(paper_ids)
    cut1 = int(n * ratios[0] + 0.5)
    cut2 = int(n * (ratios[0] + ratios[1]) + 0.5)
    assignment: dict[str, str] = {}
    for i, paper_id in enumerate(paper_ids):
        if i < cut1:
            assignment[paper_id] = "train"
        elif i < cut2:
            assignment[paper_id] = "val"
        else:
            assignment[paper_id] = "test"
    return assignment


def apply_split(corpus: Corpus, assignment: dict[str, str]) -> Corpus:
    """Return a new corpus with figure splits taken from ``assignment``."""
    for paper_id, split in assignment.items():
        if paper_id not in corpus.documents:
            raise CorpusError(f"split assigned to unknown paper {paper_id!r}")
        if split not in SPLITS:
            raise CorpusError(f"paper {paper_id!r} has unknown split {split!r}")
    figures = {
        fid: replace(fig, split=assignment.get(fig.paper_id, UNASSIGNED))
        for fid, fig in corpus.figures.items()
    }
    return Corpus(documents=dict(corpus.documents), figures=figures, splits=dict(assignment))


def filter_better(corpus: Corpus, min_tokens: int = 30) -> Corpus:
    """Keep figures whose caption has at least ``min_tokens`` raw tokens.

    Documents are retained (with figure id lists updated) so paper-level
    context stays available; the input corpus is not modified.
    """
    if min_tokens < 1:
        raise ValueError(f"min_tokens must be >= 1, got {min_tokens}")
    kept = {
        fid: fig
        for fid, fig in corpus.figures.items()
        if token_length(fig.caption_text) >= min_tokens
    }
    documents = {
        pid: replace(doc, figure_ids=tuple(fid for fid in doc.figure_ids if fid in kept))
        for pid, doc in corpus.documents.items()
    }
    return Corpus(documents=documents, figures=kept, splits=dict(corpus.splits))
