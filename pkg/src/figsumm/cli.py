"""Command line interface.

Thin client over the library: every subcommand loads inputs, calls one
or two library functions, writes deterministic artifacts under the
output directory, and prints a short plain-text summary.  The corpus
directory comes from --data-dir or the FIGCAP_DATA_DIR environment
variable.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import analysis, baselines, corpus as corpus_mod, mentions as mentions_mod, metrics, normeval
from .annotate.store import AnnotationStore, load_tasks
from .docparse import parse_document

DATA_DIR_ENV = "FIGCAP_DATA_DIR"

_data_dir_option = click.option(
    "--data-dir",
    envvar=DATA_DIR_ENV,
    required=True,
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    help=f"Corpus directory (or set {DATA_DIR_ENV}).",
)
_out_dir_option = click.option(
    "--out-dir",
    default=".",
    show_default=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="Directory for written artifacts.",
)
_seed_option = click.option(
    "--seed", default=0, show_default=True, type=int, help="Global random seed."
)


def _load(data_dir: Path) -> corpus_mod.Corpus:
    try:
        return corpus_mod.load_corpus(data_dir)
    except corpus_mod.CorpusError as exc:
        raise click.ClickException(str(exc)) from None


def _ensure_out(out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def _parse_metrics(metrics_arg: str) -> list[str]:
    names = [m.strip() for m in metrics_arg.split(",") if m.strip()]
    for name in names:
        if name not in normeval.METRIC_IDS:
            raise click.ClickException(
                f"unknown metric {name!r}; expected one of {', '.join(normeval.METRIC_IDS)}"
            )
    if not names:
        raise click.ClickException("no metrics given")
    return names


@click.group()
def main() -> None:
    """Corpus construction and evaluation for figure-caption summarization."""


@main.command()
@_data_dir_option
@_out_dir_option
@click.option(
    "--xml-dir",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    default=None,
    help="Parse paper XML files into papers.jsonl before indexing.",
)
def extract(data_dir: Path, out_dir: Path, xml_dir: Path | None) -> None:
    """Detect figure mentions and write mentions.jsonl."""
    out_dir = _ensure_out(out_dir)
    if xml_dir is not None:
        rows = []
        for xml_path in sorted(xml_dir.glob("*.xml")):
            doc = parse_document(xml_path)
            rows.append(
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
        from .jsonio import write_jsonl

        write_jsonl(out_dir / "papers.jsonl", rows)
        click.echo(f"parsed {len(rows)} papers into {out_dir / 'papers.jsonl'}")
    corpus = _load(data_dir)
    index = mentions_mod.build_mention_index(corpus)
    mentions_path = out_dir / "mentions.jsonl"
    mentions_mod.write_mentions(index, mentions_path)
    with_mentions = len(index.figures_with_mentions())
    total = len(corpus.figures)
    click.echo(f"figures: {total}")
    click.echo(f"figures with mentions: {with_mentions}")
    click.echo(f"figures without mentions: {total - with_mentions}")
    click.echo(f"unresolved references: {len(index.unresolved)}")
    click.echo(f"wrote {mentions_path}")


@main.command()
@_data_dir_option
@_out_dir_option
def mentions(data_dir: Path, out_dir: Path) -> None:
    """Report mention statistics for a corpus."""
    corpus = _load(data_dir)
    index = mentions_mod.build_mention_index(corpus)
    out_dir = _ensure_out(out_dir)
    mentions_mod.write_mentions(index, out_dir / "mentions.jsonl")
    total = len(corpus.figures)
    with_mentions = len(index.figures_with_mentions())
    counts = [len(index.for_figure(fid)) for fid in index.figures_with_mentions()]
    click.echo(f"figures: {total}")
    click.echo(f"figures with mentions: {with_mentions}")
    if total:
        click.echo(f"without-mention fraction: {100.0 * (total - with_mentions) / total:.2f}%")
    if counts:
        click.echo(f"mentions per mentioned figure: {sum(counts) / len(counts):.2f}")
    click.echo(f"wrote {out_dir / 'mentions.jsonl'}")


@main.command()
@_data_dir_option
@_out_dir_option
@_seed_option
@click.option(
    "--system",
    "systems",
    multiple=True,
    default=("reuse",),
    show_default=True,
    help="Baseline to run: reuse, random-sent, truncated (repeatable).",
)
@click.option("--kind", default="mention", show_default=True, help="Source kind for reuse.")
@click.option("--k", default=1, show_default=True, type=int, help="Sentences for random-sent.")
@click.option(
    "--target", default=10, show_default=True, type=int, help="Tokens kept by truncated."
)
def baseline(
    data_dir: Path, out_dir: Path, seed: int, systems: tuple[str, ...], kind: str, k: int, target: int
) -> None:
    """Write non-neural baseline predictions to predictions.jsonl."""
    corpus = _load(data_dir)
    index = mentions_mod.build_mention_index(corpus)
    predictions: list[baselines.PredictionRecord] = []
    for system in systems:
        if system == "reuse":
            try:
                predictions.extend(baselines.run_reuse_baseline(corpus, index, kind))
            except ValueError as exc:
                raise click.ClickException(str(exc)) from None
        elif system in ("random-sent", "truncated"):
            for figure_id in sorted(corpus.figures):
                figure = corpus.figures[figure_id]
                if system == "random-sent":
                    record = baselines.random_sentence_prediction(corpus, index, figure, k, seed)
                else:
                    record = baselines.truncated_prediction(corpus, index, figure, target, seed)
                if record is not None:
                    predictions.append(record)
        else:
            raise click.ClickException(
                f"unknown system {system!r}; expected reuse, random-sent, or truncated"
            )
    out_dir = _ensure_out(out_dir)
    path = out_dir / "predictions.jsonl"
    baselines.write_predictions(predictions, path)
    click.echo(f"wrote {len(predictions)} predictions to {path}")


@main.command()
@_data_dir_option
@_out_dir_option
@_seed_option
@click.option("--metrics", "metrics_arg", default="rouge2", show_default=True)
@click.option("--n-seeds", default=10, show_default=True, type=int)
@click.option("--split", default=None, help="Restrict to one split (train/val/test).")
def curve(
    data_dir: Path, out_dir: Path, seed: int, metrics_arg: str, n_seeds: int, split: str | None
) -> None:
    """Build random-score-versus-length curves."""
    corpus = _load(data_dir)
    index = mentions_mod.build_mention_index(corpus)
    seeds = [seed + i for i in range(n_seeds)]
    out_dir = _ensure_out(out_dir)
    for metric_id in _parse_metrics(metrics_arg):
        try:
            built = normeval.build_random_curve(
                corpus, index, metric_id, seeds=seeds, split=split
            )
        except normeval.NormEvalError as exc:
            raise click.ClickException(str(exc)) from None
        path = out_dir / f"curve_{metric_id}.json"
        normeval.save_curve(built, path)
        click.echo(
            f"{metric_id}: {len(built.anchors)} anchors,"
            f" lengths {built.anchors[0][0]:.1f}..{built.anchors[-1][0]:.1f}, wrote {path}"
        )


@main.command()
@_data_dir_option
@_out_dir_option
@click.option(
    "--predictions",
    "predictions_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
)
@click.option(
    "--curve",
    "curve_paths",
    multiple=True,
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Curve file for each scored metric (repeatable).",
)
@click.option("--metrics", "metrics_arg", default="rouge1,rouge2,rougeL", show_default=True)
def score(
    data_dir: Path,
    out_dir: Path,
    predictions_path: Path,
    curve_paths: tuple[Path, ...],
    metrics_arg: str,
) -> None:
    """Score predictions raw and length-normalized; write report.csv."""
    corpus = _load(data_dir)
    try:
        predictions = baselines.load_predictions(predictions_path)
        curves = {}
        for path in curve_paths:
            loaded = normeval.load_curve(path)
            curves[loaded.metric_id] = loaded
        rows = normeval.normalize_predictions(
            predictions, corpus, curves, _parse_metrics(metrics_arg)
        )
    except (ValueError, normeval.NormEvalError) as exc:
        raise click.ClickException(str(exc)) from None
    out_dir = _ensure_out(out_dir)
    path = out_dir / "report.csv"
    normeval.write_report(rows, path)
    for row in rows:
        normalized = "undefined" if row.normalized_score is None else f"{row.normalized_score:.3f}"
        click.echo(
            f"{row.system_id} {row.metric_id}: raw={row.raw_score:.4f}"
            f" random={row.random_score:.4f} normalized={normalized}"
            f" length={row.mean_length:.1f} n={row.n_figures}"
        )
    click.echo(f"wrote {path}")


@main.command()
@_data_dir_option
@_out_dir_option
@click.option(
    "--kinds",
    default="mention,paragraph,ocr,paragraph+ocr",
    show_default=True,
    help="Comma-separated source kinds to measure coverage for.",
)
@click.option(
    "--window",
    "windows",
    multiple=True,
    help="Extra window kind as n,m (repeatable), e.g. --window 1,1.",
)
@click.option(
    "--alignments",
    "alignments_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Score an externally produced alignments file instead.",
)
@click.option("--stopwords", default="english-v1", show_default=True)
def coverage(
    data_dir: Path,
    out_dir: Path,
    kinds: str,
    windows: tuple[str, ...],
    alignments_path: Path | None,
    stopwords: str,
) -> None:
    """Caption/source content-token coverage per source kind."""
    from .tokenization import CONTENT_CONFIG, TokenizerConfig

    config = (
        CONTENT_CONFIG
        if stopwords == CONTENT_CONFIG.stopword_list
        else TokenizerConfig(
            lowercase=True, drop_punctuation=True, stopword_list=stopwords, stem=True
        )
    )
    out_dir = _ensure_out(out_dir)
    lines = ["kind,n_pairs,caption_coverage,source_coverage"]
    if alignments_path is not None:
        try:
            sets = metrics.load_alignments(alignments_path)
        except metrics.AlignmentError as exc:
            raise click.ClickException(str(exc)) from None
        summary = metrics.coverage_summary(sets)
        click.echo(
            f"external: caption={summary.caption_coverage:.4f}"
            f" source={summary.source_coverage:.4f} n={summary.n_pairs}"
        )
        lines.append(
            f"external,{summary.n_pairs},{summary.caption_coverage!r},{summary.source_coverage!r}"
        )
    else:
        corpus = _load(data_dir)
        index = mentions_mod.build_mention_index(corpus)
        kind_list = [k.strip() for k in kinds.split(",") if k.strip()]
        kind_list.extend(f"window:{w}" for w in windows)
        for kind in kind_list:
            sets = []
            for figure_id in sorted(corpus.figures):
                figure = corpus.figures[figure_id]
                try:
                    source = mentions_mod.build_source_text(corpus, index, figure, kind)
                except ValueError as exc:
                    raise click.ClickException(str(exc)) from None
                if source is None:
                    continue
                sets.append(
                    metrics.align_content_tokens(
                        figure_id, figure.caption_text, source.text, config
                    )
                )
            if not sets:
                click.echo(f"{kind}: no figures support this kind; skipped")
                continue
            summary = metrics.coverage_summary(sets)
            click.echo(
                f"{kind}: caption={100 * summary.caption_coverage:.2f}%"
                f" source={100 * summary.source_coverage:.2f}% n={summary.n_pairs}"
            )
            lines.append(
                f"{kind},{summary.n_pairs},{summary.caption_coverage!r},{summary.source_coverage!r}"
            )
    path = out_dir / "coverage.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    click.echo(f"wrote {path}")


@main.command()
@_data_dir_option
@_out_dir_option
@_seed_option
@click.option("--contexts", default="0,1,2", show_default=True, help="Following-sentence counts.")
@click.option(
    "--references", default="first-sentence,whole", show_default=True, help="Reference modes."
)
def overlap(data_dir: Path, out_dir: Path, seed: int, contexts: str, references: str) -> None:
    """BLEU-4 overlap grid between mention contexts and captions (x100)."""
    corpus = _load(data_dir)
    index = mentions_mod.build_mention_index(corpus)
    context_list = [int(c) for c in contexts.split(",") if c.strip()]
    reference_list = [r.strip() for r in references.split(",") if r.strip()]
    lines = ["reference,candidate,context_sentences,n_figures,bleu4_x100"]
    for reference_mode in reference_list:
        for candidate_mode in mentions_mod.CANDIDATE_MODES:
            for context in context_list:
                try:
                    cell = mentions_mod.mention_caption_overlap(
                        corpus,
                        index,
                        candidate_mode=candidate_mode,
                        context_sentences=context,
                        reference_mode=reference_mode,
                        seed=seed,
                    )
                except ValueError as exc:
                    raise click.ClickException(str(exc)) from None
                click.echo(
                    f"{reference_mode} / {candidate_mode} +{context}:"
                    f" {100 * cell.bleu4:.2f} (n={cell.n_figures})"
                )
                lines.append(
                    f"{reference_mode},{candidate_mode},{context},{cell.n_figures},"
                    f"{100 * cell.bleu4!r}"
                )
    out_dir = _ensure_out(out_dir)
    path = out_dir / "overlap.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    click.echo(f"wrote {path}")


@main.command()
@_out_dir_option
@click.option(
    "--ratings",
    "ratings_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
)
@click.option(
    "--rankings",
    "rankings_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
)
@click.option(
    "--votes",
    "votes_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
)
@click.option(
    "--lengths",
    "lengths_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="predictions.jsonl whose token lengths join the correlation table.",
)
def analyze(
    out_dir: Path,
    ratings_path: Path | None,
    rankings_path: Path | None,
    votes_path: Path | None,
    lengths_path: Path | None,
) -> None:
    """Summarize annotation exports: consolidation, correlations, tallies."""
    if ratings_path is None and rankings_path is None and votes_path is None:
        raise click.ClickException("nothing to analyze: pass --ratings, --rankings, or --votes")
    out_dir = _ensure_out(out_dir)
    if ratings_path is not None:
        try:
            records = analysis.load_ratings(ratings_path)
        except ValueError as exc:
            raise click.ClickException(str(exc)) from None
        table = analysis.consolidation_table(records)
        click.echo("consolidated agreement:")
        for aspect, row in table.items():
            click.echo(
                f"  {aspect}: {row.agree}/{row.total} agree ({row.agree_pct:.2f}%)"
            )
        extra = {}
        if lengths_path is not None:
            from .tokenization import token_length

            predictions = baselines.load_predictions(lengths_path)
            extra["length"] = {p.figure_id: float(token_length(p.text)) for p in predictions}
        correlations = analysis.aspect_correlations(records, extra)
        click.echo(f"correlations over {correlations.n_units} figures:")
        for i, a in enumerate(correlations.labels):
            for j, b in enumerate(correlations.labels):
                if j <= i:
                    continue
                value = correlations.values[i][j]
                shown = f"{value:.3f}" if correlations.defined[i][j] else "undefined"
                click.echo(f"  {a} vs {b}: {shown}")
        # Caption-length histogram and density by consolidated helpfulness.
        if "helpfulness" in {r.aspect for r in records} and extra.get("length"):
            groups: dict[str, list[float]] = {}
            for record in records:
                if record.aspect != "helpfulness":
                    continue
                length = extra["length"].get(record.figure_id)
                if length is None:
                    continue
                groups.setdefault(analysis.consolidate_rating(record.value), []).append(length)
            if groups:
                distributions = analysis.length_distribution(groups)
                for warning in distributions.warnings:
                    click.echo(f"  warning: {warning}")
                analysis.write_distribution_csv(distributions, out_dir / "distribution.csv")
                analysis.write_histogram_csv(distributions, out_dir / "histogram.csv")
                click.echo(f"wrote {out_dir / 'distribution.csv'} and {out_dir / 'histogram.csv'}")
    if rankings_path is not None:
        rankings = analysis.load_rankings(rankings_path)
        by_annotator: dict[str, list[analysis.RankingRecord]] = {}
        for record in rankings:
            by_annotator.setdefault(record.annotator_id, []).append(record)
        annotators = sorted(by_annotator)
        click.echo(f"rankings from {len(annotators)} annotators")
        for i, a in enumerate(annotators):
            for b in annotators[i + 1 :]:
                try:
                    agreement = analysis.rank_agreement(by_annotator[a], by_annotator[b])
                except ValueError:
                    continue
                click.echo(
                    f"  {a} vs {b}: tau={agreement.kendall_tau:.3f}"
                    f" rho={agreement.spearman_rho:.3f} figures={agreement.n_figures}"
                )
        mean_ranks: dict[str, list[int]] = {}
        for record in rankings:
            for position, item in enumerate(record.ranking, start=1):
                mean_ranks.setdefault(item, []).append(position)
        click.echo("mean ranks (1 = best):")
        for item in sorted(mean_ranks):
            positions = mean_ranks[item]
            click.echo(f"  {item}: {sum(positions) / len(positions):.3f} over {len(positions)}")
    if votes_path is not None:
        votes = analysis.load_votes(votes_path)
        try:
            tally = analysis.worst_vote_tally(votes)
        except ValueError as exc:
            raise click.ClickException(str(exc)) from None
        click.echo("worst-vote tally:")
        for item, row in tally.items():
            click.echo(
                f"  {item}: voted worst on {row.times_worst} figures,"
                f" {row.mean_votes:.2f} votes/figure"
            )


@main.command()
@click.option(
    "--gold",
    "gold_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Gold TSV: sentence TAB comma-separated figure labels.",
)
@click.option("--min-precision", default=0.99, show_default=True, type=float)
@click.option("--min-recall", default=0.94, show_default=True, type=float)
def goldeval(gold_path: Path, min_precision: float, min_recall: float) -> None:
    """Evaluate the mention detector against a gold sentence set."""
    try:
        gold = mentions_mod.load_gold(gold_path)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None
    report = mentions_mod.evaluate_detector(gold)
    click.echo(f"sentences: {len(gold)}")
    click.echo(f"tp={report.tp} fp={report.fp} fn={report.fn}")
    click.echo(f"precision: {report.precision:.4f} (gate {min_precision})")
    click.echo(f"recall: {report.recall:.4f} (gate {min_recall})")
    if report.precision >= min_precision and report.recall >= min_recall:
        click.echo("PASS")
    else:
        click.echo("FAIL")
        sys.exit(1)


@main.command()
@click.option(
    "--store-dir",
    required=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="Directory for the append-only annotation log.",
)
@click.option(
    "--tasks",
    "tasks_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@_seed_option
@click.option(
    "--figures-dir",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    default=None,
)
@click.option(
    "--ui-dir",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    default=None,
)
def serve(
    store_dir: Path,
    tasks_path: Path,
    port: int,
    host: str,
    seed: int,
    figures_dir: Path | None,
    ui_dir: Path | None,
) -> None:
    """Run the annotation service."""
    import uvicorn

    from .annotate.service import create_app

    try:
        tasks = load_tasks(tasks_path)
        store = AnnotationStore(store_dir, tasks, seed=seed)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None
    app = create_app(store, figures_dir=figures_dir, ui_dir=ui_dir)
    click.echo(f"serving {len(tasks)} tasks on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
