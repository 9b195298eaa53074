"""Overlap metrics and caption/source token alignment.

ROUGE-1/2/L are computed at the pair level with clipped n-gram counts
(longest common subsequence for the L variant) and reported as precision,
recall, and F1.  BLEU-4 is corpus level: clipped n-gram counts are summed
over all pairs before the precisions are taken, the geometric mean uses
orders 1..4, and the brevity penalty compares aggregate lengths.  No
smoothing is applied anywhere.

Coverage works on content tokens (lowercased, punctuation and stopwords
removed, stemmed).  Tokens are aligned greedily by position: each caption
token takes the earliest unused source token with an equal stem.  Because
equal stems form interchangeable groups, this greedy pass links exactly
as many tokens as the best possible one-to-one matching.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from math import exp, log
from pathlib import Path
from typing import Iterable, Sequence

from .jsonio import iter_jsonl, write_jsonl
from .tokenization import CONTENT_CONFIG, SCORING_CONFIG, TokenizerConfig, tokenize

__all__ = [
    "RougeScore",
    "ROUGE_VARIANTS",
    "rouge",
    "rouge_from_tokens",
    "bleu4_corpus",
    "TokenLink",
    "AlignmentSet",
    "AlignmentError",
    "align_content_tokens",
    "CoverageSummary",
    "coverage_summary",
    "write_alignments",
    "load_alignments",
    "load_external_scores",
]

ROUGE_VARIANTS = ("rouge1", "rouge2", "rougeL")


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    cand_counts = _ngram_counts(candidate, n)
    ref_counts = _ngram_counts(reference, n)
    overlap = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
    cand_total = sum(cand_counts.values())
    ref_total = sum(ref_counts.values())
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    return RougeScore(precision, recall, _f1(precision, recall))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[len(b)]


def _rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    lcs = _lcs_length(candidate, reference)
    precision = lcs / len(candidate) if candidate else 0.0
    recall = lcs / len(reference) if reference else 0.0
    return RougeScore(precision, recall, _f1(precision, recall))


def rouge_from_tokens(
    candidate: Sequence[str], reference: Sequence[str], variant: str
) -> RougeScore:
    if variant == "rouge1":
        return _rouge_n(candidate, reference, 1)
    if variant == "rouge2":
        return _rouge_n(candidate, reference, 2)
    if variant == "rougeL":
        return _rouge_l(candidate, reference)
    raise ValueError(f"unknown ROUGE variant {variant!r}; expected one of {ROUGE_VARIANTS}")


def rouge(
    candidate_text: str,
    reference_text: str,
    variant: str = "rouge1",
    config: TokenizerConfig = SCORING_CONFIG,
) -> RougeScore:
    """Score a candidate against a reference under the scoring tokenizer."""
    return rouge_from_tokens(
        tokenize(candidate_text, config), tokenize(reference_text, config), variant
    )


def bleu4_corpus(
    pairs: Iterable[tuple[str, str]],
    config: TokenizerConfig = SCORING_CONFIG,
    max_n: int = 4,
) -> float:
    """Corpus-level BLEU on (candidate, reference) text pairs, in [0, 1].

    Clipped counts are pooled across all pairs before any precision is
    computed; a zero pooled count at any order gives a score of 0 (no
    smoothing).  The brevity penalty uses total candidate and reference
    lengths.
    """
    numerators = [0] * max_n
    denominators = [0] * max_n
    cand_total = 0
    ref_total = 0
    n_pairs = 0
    for candidate_text, reference_text in pairs:
        n_pairs += 1
        candidate = tokenize(candidate_text, config)
        reference = tokenize(reference_text, config)
        cand_total += len(candidate)
        ref_total += len(reference)
        for n in range(1, max_n + 1):
            cand_counts = _ngram_counts(candidate, n)
            ref_counts = _ngram_counts(reference, n)
            numerators[n - 1] += sum(
                min(count, ref_counts[gram]) for gram, count in cand_counts.items()
            )
            denominators[n - 1] += max(len(candidate) - n + 1, 0)
    if n_pairs == 0:
        raise ValueError("bleu4_corpus needs at least one pair")
    if cand_total == 0 or any(num == 0 or den == 0 for num, den in zip(numerators, denominators)):
        return 0.0
    log_precision = sum(log(num / den) for num, den in zip(numerators, denominators)) / max_n
    brevity = 1.0 if cand_total > ref_total else exp(1.0 - ref_total / cand_total)
    return brevity * exp(log_precision)


# ---------------------------------------------------------------------------
# Coverage alignment
# ---------------------------------------------------------------------------


class AlignmentError(ValueError):
    """Raised when an alignment file fails validation."""


@dataclass(frozen=True)
class TokenLink:
    caption_index: int
    source_index: int


@dataclass(frozen=True)
class AlignmentSet:
    """Content-token alignment between one caption and one source text."""

    pair_id: str
    caption_tokens: tuple[str, ...]
    source_tokens: tuple[str, ...]
    links: tuple[TokenLink, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "caption_tokens", tuple(self.caption_tokens))
        object.__setattr__(self, "source_tokens", tuple(self.source_tokens))
        object.__setattr__(self, "links", tuple(self.links))
        seen_caption: set[int] = set()
        seen_source: set[int] = set()
        for link in self.links:
            if not (0 <= link.caption_index < len(self.caption_tokens)):
                raise AlignmentError(
                    f"pair {self.pair_id}: caption index {link.caption_index} out of range"
                )
            if not (0 <= link.source_index < len(self.source_tokens)):
                raise AlignmentError(
                    f"pair {self.pair_id}: source index {link.source_index} out of range"
                )
            if link.caption_index in seen_caption:
                raise AlignmentError(
                    f"pair {self.pair_id}: caption token {link.caption_index} linked twice"
                )
            if link.source_index in seen_source:
                raise AlignmentError(
                    f"pair {self.pair_id}: source token {link.source_index} linked twice"
                )
            seen_caption.add(link.caption_index)
            seen_source.add(link.source_index)

    @property
    def caption_coverage(self) -> float | None:
        """Fraction of caption content tokens that found a source token."""
        if not self.caption_tokens:
            return None
        return len(self.links) / len(self.caption_tokens)

    @property
    def source_coverage(self) -> float | None:
        """Fraction of source content tokens linked to the caption."""
        if not self.source_tokens:
            return None
        return len(self.links) / len(self.source_tokens)

    def unlinked_caption_indices(self) -> list[int]:
        linked = {link.caption_index for link in self.links}
        return [i for i in range(len(self.caption_tokens)) if i not in linked]


def align_content_tokens(
    pair_id: str,
    caption_text: str,
    source_text: str,
    config: TokenizerConfig = CONTENT_CONFIG,
) -> AlignmentSet:
    """Align caption content tokens to source content tokens by stem equality.

    Greedy by position: caption tokens are scanned left to right and each
    takes the earliest source occurrence of the same token that is still
    unused.  The number of links equals the maximum one-to-one matching
    because links only ever connect equal tokens.
    """
    caption_tokens = tokenize(caption_text, config)
    source_tokens = tokenize(source_text, config)
    positions: dict[str, deque[int]] = {}
    for i, token in enumerate(source_tokens):
        positions.setdefault(token, deque()).append(i)
    links = []
    for ci, token in enumerate(caption_tokens):
        queue = positions.get(token)
        if queue:
            links.append(TokenLink(caption_index=ci, source_index=queue.popleft()))
    return AlignmentSet(
        pair_id=pair_id,
        caption_tokens=tuple(caption_tokens),
        source_tokens=tuple(source_tokens),
        links=tuple(links),
    )


@dataclass(frozen=True)
class CoverageSummary:
    n_pairs: int
    n_caption_undefined: int
    n_source_undefined: int
    caption_coverage: float | None
    source_coverage: float | None


def coverage_summary(sets: Iterable[AlignmentSet]) -> CoverageSummary:
    """Macro-average coverage over pairs, skipping undefined sides."""
    sets = list(sets)
    caption_values = [s.caption_coverage for s in sets if s.caption_coverage is not None]
    source_values = [s.source_coverage for s in sets if s.source_coverage is not None]
    return CoverageSummary(
        n_pairs=len(sets),
        n_caption_undefined=len(sets) - len(caption_values),
        n_source_undefined=len(sets) - len(source_values),
        caption_coverage=sum(caption_values) / len(caption_values) if caption_values else None,
        source_coverage=sum(source_values) / len(source_values) if source_values else None,
    )


def write_alignments(sets: Iterable[AlignmentSet], path: str | Path) -> None:
    write_jsonl(
        path,
        (
            {
                "pair_id": s.pair_id,
                "caption_tokens": list(s.caption_tokens),
                "source_tokens": list(s.source_tokens),
                "links": [[l.caption_index, l.source_index] for l in s.links],
            }
            for s in sets
        ),
    )


def load_alignments(path: str | Path) -> list[AlignmentSet]:
    """Read alignment sets produced here or by an external aligner."""
    sets = []
    for lineno, record in iter_jsonl(path):
        where = f"{path}:{lineno}"
        try:
            links = tuple(
                TokenLink(caption_index=int(pair[0]), source_index=int(pair[1]))
                for pair in record.get("links", [])
            )
            sets.append(
                AlignmentSet(
                    pair_id=str(record["pair_id"]),
                    caption_tokens=tuple(str(t) for t in record.get("caption_tokens", [])),
                    source_tokens=tuple(str(t) for t in record.get("source_tokens", [])),
                    links=links,
                )
            )
        except KeyError as exc:
            raise AlignmentError(f"{where}: missing required field {exc.args[0]!r}") from None
        except (AlignmentError, ValueError, TypeError, IndexError) as exc:
            raise AlignmentError(f"{where}: {exc}") from None
    return sets


def load_external_scores(path: str | Path) -> list[dict]:
    """Read externally computed per-figure metric scores.

    Each row carries figure_id, system_id, metric_id, and score; an
    optional token_length lets the normalization step work without the
    prediction texts.
    """
    rows = []
    for lineno, record in iter_jsonl(path):
        where = f"{path}:{lineno}"
        for key in ("figure_id", "system_id", "metric_id", "score"):
            if key not in record:
                raise AlignmentError(f"{where}: missing required field {key!r}")
        row = {
            "figure_id": str(record["figure_id"]),
            "system_id": str(record["system_id"]),
            "metric_id": str(record["metric_id"]),
            "score": float(record["score"]),
        }
        if "token_length" in record:
            row["token_length"] = int(record["token_length"])
        rows.append(row)
    return rows
