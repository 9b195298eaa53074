"""Length-normalized evaluation.

Overlap metrics reward longer outputs, so raw scores of systems writing
at different lengths are not comparable.  The fix: estimate the score a
random baseline earns at each output length, then report

    normalized = raw_score / random_score_at(mean output length)

A value above 1 means the system beats length-matched random text.

The random curve is built from the corpus itself: for every figure, k
random paragraph sentences (k = 1..10) and single sentences truncated to
4, 6, ..., 30 tokens are scored against the true caption, over several
seeds.  Each sampler setting contributes one anchor (mean length, mean
score); lookups between anchors use piecewise-linear interpolation and
the curve is clamped flat outside its anchor range.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .baselines import PredictionRecord, random_sentence_prediction, truncated_prediction
from .corpus import Corpus
from .jsonio import dumps_canonical
from .mentions import MentionIndex
from .metrics import ROUGE_VARIANTS, bleu4_corpus, rouge
from .rnd import RNG_SCHEME_ID
from .tokenization import token_length

__all__ = [
    "METRIC_IDS",
    "NormEvalError",
    "evaluate_pairs",
    "RandomCurve",
    "build_random_curve",
    "save_curve",
    "load_curve",
    "ScoreRow",
    "normalize_predictions",
    "normalize_external",
    "BeamSplitReport",
    "beam_split_eval",
    "write_report",
    "DEFAULT_KS",
    "DEFAULT_TRUNCATIONS",
    "DEFAULT_SEEDS",
]

METRIC_IDS = ROUGE_VARIANTS + ("bleu4",)

DEFAULT_KS = tuple(range(1, 11))
DEFAULT_TRUNCATIONS = tuple(range(4, 31, 2))
DEFAULT_SEEDS = tuple(range(10))


class NormEvalError(ValueError):
    """Raised on unusable curves, metrics, or prediction sets."""


def evaluate_pairs(metric_id: str, pairs: Sequence[tuple[str, str]]) -> float:
    """Aggregate a metric over (candidate, reference) pairs.

    ROUGE variants are averaged pair F1; BLEU-4 pools counts across the
    whole set before computing precisions.
    """
    if not pairs:
        raise NormEvalError(f"metric {metric_id!r} needs at least one pair")
    if metric_id in ROUGE_VARIANTS:
        return sum(rouge(c, r, metric_id).f1 for c, r in pairs) / len(pairs)
    if metric_id == "bleu4":
        return bleu4_corpus(pairs)
    raise NormEvalError(f"unknown metric {metric_id!r}; expected one of {METRIC_IDS}")


@dataclass(frozen=True)
class RandomCurve:
    """Random-baseline score as a function of output token length."""

    metric_id: str
    anchors: tuple[tuple[float, float], ...]
    seeds: tuple[int, ...] = ()
    rng_scheme: str = RNG_SCHEME_ID
    settings: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "anchors", tuple((float(l), float(s)) for l, s in self.anchors))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if len(self.anchors) < 2:
            raise NormEvalError(
                f"curve for {self.metric_id!r} needs at least two anchors, got {len(self.anchors)}"
            )
        lengths = [l for l, _ in self.anchors]
        if any(b <= a for a, b in zip(lengths, lengths[1:])):
            raise NormEvalError(
                f"curve for {self.metric_id!r} must have strictly increasing anchor lengths"
            )

    def random_of_length(self, length: float) -> float:
        """Interpolate the curve at ``length``, clamped at the ends."""
        anchors = self.anchors
        if length <= anchors[0][0]:
            return anchors[0][1]
        if length >= anchors[-1][0]:
            return anchors[-1][1]
        for (x0, y0), (x1, y1) in zip(anchors, anchors[1:]):
            if x0 <= length <= x1:
                t = (length - x0) / (x1 - x0)
                return y0 + t * (y1 - y0)
        raise AssertionError("unreachable: length inside anchor range")


def _merge_anchors(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Sort anchor points by length, averaging scores at equal lengths."""
    grouped: dict[float, list[float]] = {}
    for length, score in points:
        grouped.setdefault(length, []).append(score)
    return [(length, sum(scores) / len(scores)) for length, scores in sorted(grouped.items())]


def build_random_curve(
    corpus: Corpus,
    index: MentionIndex,
    metric_id: str,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    ks: Sequence[int] = DEFAULT_KS,
    truncations: Sequence[int] = DEFAULT_TRUNCATIONS,
    split: str | None = None,
) -> RandomCurve:
    """Estimate the random-score-versus-length curve on a corpus.

    Every sampler setting (k sentences, or truncation to N tokens) is run
    for each seed over all figures that have a mention (optionally
    restricted to one split); its anchor is the mean output length paired
    with the seed-averaged metric score.
    """
    if metric_id not in METRIC_IDS:
        raise NormEvalError(f"unknown metric {metric_id!r}; expected one of {METRIC_IDS}")
    if not seeds:
        raise NormEvalError("need at least one seed")
    figures = [
        corpus.figures[fid]
        for fid in index.figures_with_mentions()
        if split is None or corpus.figures[fid].split == split
    ]
    if not figures:
        raise NormEvalError("no figures with mentions to build a curve from")

    def sample(figure, setting_kind: str, value: int, seed: int):
        if setting_kind == "k":
            return random_sentence_prediction(corpus, index, figure, value, seed)
        return truncated_prediction(corpus, index, figure, value, seed)

    points: list[tuple[float, float]] = []
    settings = [("k", k) for k in ks] + [("t", t) for t in truncations]
    for setting_kind, value in settings:
        lengths: list[int] = []
        seed_scores: list[float] = []
        for seed in seeds:
            pairs: list[tuple[str, str]] = []
            for figure in figures:
                prediction = sample(figure, setting_kind, value, seed)
                if prediction is None:
                    continue
                pairs.append((prediction.text, figure.caption_text))
                lengths.append(token_length(prediction.text))
            if pairs:
                seed_scores.append(evaluate_pairs(metric_id, pairs))
        if not lengths:
            continue
        points.append(
            (sum(lengths) / len(lengths), sum(seed_scores) / len(seed_scores))
        )

    return RandomCurve(
        metric_id=metric_id,
        anchors=tuple(_merge_anchors(points)),
        seeds=tuple(seeds),
        rng_scheme=RNG_SCHEME_ID,
        settings={"ks": list(ks), "truncations": list(truncations), "split": split},
    )


def save_curve(curve: RandomCurve, path: str | Path) -> None:
    payload = {
        "metric_id": curve.metric_id,
        "rng_scheme": curve.rng_scheme,
        "seeds": list(curve.seeds),
        "settings": curve.settings,
        "anchors": [[l, s] for l, s in curve.anchors],
    }
    Path(path).write_text(dumps_canonical(payload) + "\n", encoding="utf-8")


def load_curve(path: str | Path) -> RandomCurve:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise NormEvalError(f"{path}: malformed JSON ({exc.msg})") from None
    for key in ("metric_id", "anchors"):
        if key not in payload:
            raise NormEvalError(f"{path}: missing required field {key!r}")
    try:
        return RandomCurve(
            metric_id=str(payload["metric_id"]),
            anchors=tuple((float(l), float(s)) for l, s in payload["anchors"]),
            seeds=tuple(int(s) for s in payload.get("seeds", [])),
            rng_scheme=str(payload.get("rng_scheme", RNG_SCHEME_ID)),
            settings=payload.get("settings", {}),
        )
    except (NormEvalError, ValueError, TypeError) as exc:
        raise NormEvalError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# Normalized score reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScoreRow:
    """One (system, metric) line of a normalized report."""

    system_id: str
    metric_id: str
    n_figures: int
    mean_length: float
    raw_score: float
    random_score: float
    normalized_score: float | None
    beats_random: bool | None


def _score_system(
    system_id: str,
    predictions: Sequence[PredictionRecord],
    corpus: Corpus,
    curves: dict[str, RandomCurve],
    metrics: Sequence[str],
) -> list[ScoreRow]:
    pairs = []
    lengths = []
    for record in predictions:
        figure = corpus.figures.get(record.figure_id)
        if figure is None:
            raise NormEvalError(
                f"system {system_id!r}: prediction for unknown figure {record.figure_id!r}"
            )
        pairs.append((record.text, figure.caption_text))
        lengths.append(token_length(record.text))
    mean_length = sum(lengths) / len(lengths)
    rows = []
    for metric_id in metrics:
        curve = curves.get(metric_id)
        if curve is None:
            raise NormEvalError(f"no random curve provided for metric {metric_id!r}")
        if curve.metric_id != metric_id:
            raise NormEvalError(
                f"curve metric mismatch: got {curve.metric_id!r}, need {metric_id!r}"
            )
        raw = evaluate_pairs(metric_id, pairs)
        random_score = curve.random_of_length(mean_length)
        if random_score > 0:
            normalized = raw / random_score
            beats = normalized > 1.0
        else:
            normalized = None
            beats = None
        rows.append(
            ScoreRow(
                system_id=system_id,
                metric_id=metric_id,
                n_figures=len(pairs),
                mean_length=mean_length,
                raw_score=raw,
                random_score=random_score,
                normalized_score=normalized,
                beats_random=beats,
            )
        )
    return rows


def normalize_predictions(
    predictions: Iterable[PredictionRecord],
    corpus: Corpus,
    curves: dict[str, RandomCurve],
    metrics: Sequence[str] = ("rouge1", "rouge2", "rougeL"),
) -> list[ScoreRow]:
    """Score every system in ``predictions`` raw and length-normalized."""
    by_system: dict[str, list[PredictionRecord]] = {}
    for record in predictions:
        by_system.setdefault(record.system_id, []).append(record)
    if not by_system:
        raise NormEvalError("no predictions to score")
    rows: list[ScoreRow] = []
    for system_id in sorted(by_system):
        rows.extend(_score_system(system_id, by_system[system_id], corpus, curves, metrics))
    return rows


def normalize_external(
    score_rows: Iterable[dict],
    curves: dict[str, RandomCurve],
    lengths: dict[str, int] | None = None,
) -> list[ScoreRow]:
    """Normalize externally computed per-figure scores.

    Rows carry figure_id/system_id/metric_id/score and optionally
    token_length; lengths may instead come from a figure_id -> length
    map.  The raw score is the mean over figures, normalized at the mean
    token length of the scored outputs.
    """
    grouped: dict[tuple[str, str], list[dict]] = {}
    for row in score_rows:
        grouped.setdefault((row["system_id"], row["metric_id"]), []).append(row)
    if not grouped:
        raise NormEvalError("no external scores to normalize")
    out: list[ScoreRow] = []
    for (system_id, metric_id) in sorted(grouped):
        rows = grouped[(system_id, metric_id)]
        curve = curves.get(metric_id)
        if curve is None:
            raise NormEvalError(f"no random curve provided for metric {metric_id!r}")
        per_lengths: list[float] = []
        for row in rows:
            if "token_length" in row:
                per_lengths.append(float(row["token_length"]))
            elif lengths is not None and row["figure_id"] in lengths:
                per_lengths.append(float(lengths[row["figure_id"]]))
            else:
                raise NormEvalError(
                    f"system {system_id!r}, metric {metric_id!r}: no token length for"
                    f" figure {row['figure_id']!r} (provide token_length or a lengths map)"
                )
        mean_length = sum(per_lengths) / len(per_lengths)
        raw = sum(r["score"] for r in rows) / len(rows)
        random_score = curve.random_of_length(mean_length)
        normalized = raw / random_score if random_score > 0 else None
        out.append(
            ScoreRow(
                system_id=system_id,
                metric_id=metric_id,
                n_figures=len(rows),
                mean_length=mean_length,
                raw_score=raw,
                random_score=random_score,
                normalized_score=normalized,
                beats_random=None if normalized is None else normalized > 1.0,
            )
        )
    return out


@dataclass(frozen=True)
class BeamSplitReport:
    """Normalized reports for two disjoint figure pools."""

    helpful: tuple[ScoreRow, ...]
    unhelpful: tuple[ScoreRow, ...]
    n_helpful: int
    n_unhelpful: int
    warnings: tuple[str, ...]


def beam_split_eval(
    predictions: Iterable[PredictionRecord],
    corpus: Corpus,
    curves: dict[str, RandomCurve],
    helpful_ids: Iterable[str],
    metrics: Sequence[str] = ("rouge1", "rouge2", "rougeL"),
) -> BeamSplitReport:
    """Score predictions separately on helpful-rated and other figures.

    An empty side produces an empty report plus a warning instead of an
    error, so a lopsided annotation round still yields the other half.
    """
    helpful_set = set(helpful_ids)
    split_preds: dict[str, list[PredictionRecord]] = {"helpful": [], "unhelpful": []}
    for record in predictions:
        bucket = "helpful" if record.figure_id in helpful_set else "unhelpful"
        split_preds[bucket].append(record)
    warnings = []
    reports: dict[str, list[ScoreRow]] = {}
    for bucket, bucket_preds in split_preds.items():
        if not bucket_preds:
            warnings.append(f"no predictions on the {bucket} side; its report is empty")
            reports[bucket] = []
        else:
            reports[bucket] = normalize_predictions(bucket_preds, corpus, curves, metrics)
    return BeamSplitReport(
        helpful=tuple(reports["helpful"]),
        unhelpful=tuple(reports["unhelpful"]),
        n_helpful=len(split_preds["helpful"]),
        n_unhelpful=len(split_preds["unhelpful"]),
        warnings=tuple(warnings),
    )


_REPORT_COLUMNS = (
    "system_id",
    "metric_id",
    "n_figures",
    "mean_length",
    "raw_score",
    "random_score",
    "normalized_score",
    "beats_random",
)


def write_report(rows: Iterable[ScoreRow], path: str | Path) -> None:
    """Write score rows as CSV with a fixed column order."""
    lines = [",".join(_REPORT_COLUMNS)]
    for row in rows:
        lines.append(
            ",".join(
                [
                    row.system_id,
                    row.metric_id,
                    str(row.n_figures),
                    repr(row.mean_length),
                    repr(row.raw_score),
                    repr(row.random_score),
                    "" if row.normalized_score is None else repr(row.normalized_score),
                    "" if row.beats_random is None else str(row.beats_random).lower(),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
