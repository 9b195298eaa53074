"""Document parsing: XML body extraction, sentence segmentation, OCR order.

Papers arrive as TEI-style XML.  Only ``<p>`` blocks inside the body are
kept; inline formula elements are replaced by a single ``MATH`` placeholder
token so token counts stay stable across documents.  Paragraph text is
whitespace-normalized.

Sentence segmentation is a deterministic rule engine: sentences end at
``.``, ``?`` or ``!`` followed by whitespace and an uppercase letter, a
digit, or an opening bracket/quote, unless the period belongs to a known
abbreviation (``Fig.``, ``et al.``, ``e.g.`` ...).  Each sentence carries
its character span into the paragraph text.

OCR boxes are linearized left-to-right then top-to-bottom: boxes are
grouped into rows by vertical proximity and read in x order within a row.
The result is independent of the input order of the boxes.
"""

from __future__ import annotations

import re
import statistics
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Document, OcrBox, Paragraph, Sentence

__all__ = [
    "DocumentParseError",
    "MATH_PLACEHOLDER",
    "parse_document",
    "normalize_whitespace",
    "segment_sentences",
    "order_ocr",
    "ocr_text",
]

MATH_PLACEHOLDER = "MATH"

_WS_RE = re.compile(r"\s+")


class DocumentParseError(ValueError):
    """Raised when a paper XML file cannot be parsed into a document."""


def normalize_whitespace(text: str) -> str:
    """Collapse whitespace runs to single spaces and strip the ends."""
    return _WS_RE.sub(" ", text).strip()


def _strip_tag(tag: str) -> str:
    """Drop any XML namespace prefix from an element tag."""
    return tag.rsplit("}", 1)[-1]


def _element_text(element: ET.Element) -> str:
    """Flatten an element to text, replacing formula subtrees with MATH."""
    parts: list[str] = []
    if element.text:
        parts.append(element.text)
    for child in element:
        if _strip_tag(child.tag) == "formula":
            parts.append(" " + MATH_PLACEHOLDER + " ")
        else:
            parts.append(_element_text(child))
        if child.tail:
            parts.append(child.tail)
    return "".join(parts)


def _byte_offset(raw: bytes, line: int, column: int) -> int:
    """Translate a 1-based line / 0-based column position to a byte offset."""
    lines = raw.split(b"\n")
    offset = sum(len(l) + 1 for l in lines[: line - 1])
    return offset + column


def parse_document(xml_path: str | Path, paper_id: str | None = None) -> Document:
    """Parse one paper XML file into a :class:`Document`.

    ``paper_id`` defaults to the file stem.  Malformed XML raises
    :class:`DocumentParseError` naming the file, line, column, and byte
    offset of the first error.
    """
    path = Path(xml_path)
    raw = path.read_bytes()
    try:
        root = ET.fromstring(raw)
    except ET.ParseError as exc:
        line, column = exc.position
        offset = _byte_offset(raw, line, column)
        raise DocumentParseError(
            f"{path}: malformed XML at line {line}, column {column} (byte offset {offset}): {exc.msg}"
        ) from None

    if paper_id is None:
        paper_id = path.stem

    title = ""
    abstract = ""
    paragraphs: list[Paragraph] = []
    index = 0
    for element in root.iter():
        tag = _strip_tag(element.tag)
        if tag == "title" and not title:
            title = normalize_whitespace(_element_text(element))
        elif tag == "abstract" and not abstract:
            abstract = normalize_whitespace(_element_text(element))
        elif tag == "p":
            text = normalize_whitespace(_element_text(element))
            if not text:
                continue
            paragraphs.append(
                Paragraph(
                    paragraph_id=f"p{index}",
                    text=text,
                    sentences=segment_sentences(text),
                )
            )
            index += 1
    return Document(
        paper_id=paper_id,
        title=title,
        abstract=abstract,
        paragraphs=paragraphs,
        figure_ids=[],
    )


# ---------------------------------------------------------------------------
# Sentence segmentation
# ---------------------------------------------------------------------------

# Periods after these (lowercased, dot-free) never end a sentence.
_ABBREVIATIONS = frozenset(
    [
        "fig", "figs", "eq", "eqs", "tab", "tabs", "sec", "secs", "ref",
        "refs", "al", "vs", "cf", "etc", "resp", "approx", "no", "nos",
        "dr", "mr", "mrs", "ms", "prof", "st", "jr", "sr", "ca", "e.g",
        "i.e", "et al",
    ]
)

# A sentence boundary: terminal punctuation (with optional closing quote or
# bracket), whitespace, then something that looks like a sentence start.
_BOUNDARY_RE = re.compile(r"[.?!][\)\]\"']*\s+(?=[A-Z0-9(\[\"'])")

_TRAILING_WORD_RE = re.compile(r"([A-Za-z][A-Za-z.]*)\.$")


def _is_abbreviation_end(prefix: str) -> bool:
    """True when ``prefix`` (text up to and including a period) ends in an
    abbreviation whose period should not close the sentence."""
    match = _TRAILING_WORD_RE.search(prefix)
    if not match:
        return False
    word = match.group(1).lower().rstrip(".")
    if word in _ABBREVIATIONS:
        return True
    # "et al." is two tokens; check the bigram too.
    if word == "al" and prefix.lower().rstrip(". ").endswith("et al"):
        return True
    # Single capital letters read as initials (A. Lovelace).
    if len(word) == 1 and match.group(1).isupper():
        return True
    # Dotted abbreviations like "e.g." / "i.e." / "U.S." keep their dots.
    if "." in word:
        return True
    return False


def segment_sentences(text: str) -> list[Sentence]:
    """Split normalized paragraph text into sentences with spans.

    Spans are non-overlapping, ascending, and each sentence text equals
    ``text[start:end]``.  Joining the sentence texts with single spaces
    reproduces the input text.
    """
    if not text:
        return []
    boundaries: list[int] = []
    for match in _BOUNDARY_RE.finditer(text):
        punct_pos = match.start()
        if text[punct_pos] == "." and _is_abbreviation_end(text[: punct_pos + 1]):
            continue
        boundaries.append(match.end())
    sentences: list[Sentence] = []
    start = 0
    for cut in boundaries:
        chunk = text[start:cut].rstrip()
        if chunk:
            sentences.append(Sentence(text=chunk, start=start, end=start + len(chunk)))
        start = cut
    tail = text[start:].rstrip()
    if tail:
        sentences.append(Sentence(text=tail, start=start, end=start + len(tail)))
    return sentences


# ---------------------------------------------------------------------------
# OCR linearization
# ---------------------------------------------------------------------------


def order_ocr(boxes: Iterable[OcrBox], row_tolerance: float | None = None) -> list[OcrBox]:
    """Order OCR boxes left-to-right within rows, rows top-to-bottom.

    Boxes are first put into a canonical order (by y, then x, then text) so
    the grouping is independent of input order.  A box joins the current
    row when its y is within ``row_tolerance`` of the row's first box;
    the tolerance defaults to half the median box height.
    """
    canonical = sorted(boxes, key=lambda b: (b.y, b.x, b.text))
    if not canonical:
        return []
    if row_tolerance is None:
        heights = [b.h for b in canonical if b.h > 0]
        row_tolerance = statistics.median(heights) / 2 if heights else 0.0

    rows: list[list[OcrBox]] = []
    anchor_y: float | None = None
    for box in canonical:
        if anchor_y is not None and abs(box.y - anchor_y) <= row_tolerance:
            rows[-1].append(box)
        else:
            rows.append([box])
            anchor_y = box.y
    ordered: list[OcrBox] = []
    for row in rows:
        ordered.extend(sorted(row, key=lambda b: (b.x, b.y, b.text)))
    return ordered


def ocr_text(boxes: Sequence[OcrBox], row_tolerance: float | None = None) -> str:
    """Linearize OCR boxes into a single space-joined string."""
    return " ".join(b.text for b in order_ocr(boxes, row_tolerance) if b.text)
