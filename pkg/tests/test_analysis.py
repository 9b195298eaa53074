"""Statistics over annotation records: consolidation, correlation,
agreement, tallies, t tests, and length densities."""

from __future__ import annotations

import math

import numpy as np
import pytest

from figsumm.analysis import (
    RankingRecord,
    RatingRecord,
    VoteRecord,
    aspect_correlations,
    consolidate_rating,
    consolidation_table,
    correlate_missing_with_ratings,
    length_distribution,
    load_rankings,
    load_ratings,
    load_votes,
    mean_diff_ttest,
    missing_information,
    pearson,
    rank_agreement,
    worst_vote_tally,
    write_distribution_csv,
    write_histogram_csv,
    write_rankings,
    write_ratings,
    write_votes,
)
from figsumm.metrics import AlignmentSet, TokenLink, align_content_tokens

# ---------------------------------------------------------------------------
# Consolidation
# ---------------------------------------------------------------------------


def test_consolidate_rule() -> None:
    assert consolidate_rating(5) == "agree"
    assert consolidate_rating(4) == "agree"
    assert consolidate_rating(3) == "disagree"
    assert consolidate_rating(2) == "disagree"
    assert consolidate_rating(1) == "disagree"


def test_consolidate_range() -> None:
    with pytest.raises(ValueError):
        consolidate_rating(0)
    with pytest.raises(ValueError):
        consolidate_rating(6)


def _rating(figure: str, value: int, aspect: str = "helpfulness", **kw) -> RatingRecord:
    return RatingRecord(
        annotator_id="a1", figure_id=figure, item_id="caption", aspect=aspect, value=value, **kw
    )


def test_consolidation_table_partition() -> None:
    records = [_rating(f"f{i}", value) for i, value in enumerate([5, 4, 3, 2, 1, 4])]
    table = consolidation_table(records)
    row = table["helpfulness"]
    assert row.agree == 3
    assert row.disagree == 3
    assert row.agree + row.disagree == len(records)


def test_consolidation_agree_fraction() -> None:
    records = [_rating(f"f{i}", 4 if i < 184 else 3) for i in range(399)]
    row = consolidation_table(records)["helpfulness"]
    assert row.agree == 184
    assert row.total == 399
    assert row.agree_pct == pytest.approx(46.12, abs=0.01)


def test_consolidation_skips_invalid() -> None:
    records = [
        _rating("f1", 5),
        _rating("f2", 5, valid=False, exclusion_reason="incomplete image"),
    ]
    row = consolidation_table(records)["helpfulness"]
    assert row.total == 1


def test_rating_record_validation() -> None:
    with pytest.raises(ValueError):
        _rating("f1", 9)
    with pytest.raises(ValueError):
        _rating("f1", 3, valid=True, exclusion_reason="reason without flag")


# ---------------------------------------------------------------------------
# Pearson and aspect correlations
# ---------------------------------------------------------------------------


def test_pearson_hand_case() -> None:
    result = pearson([1, 2, 3], [1, 2, 4])
    assert result.defined
    assert result.r == pytest.approx(9 / math.sqrt(84), abs=1e-12)
    assert result.r == pytest.approx(0.98198, abs=1e-5)


def test_pearson_bounds_and_affine_invariance() -> None:
    x = [1.0, 4.0, 2.0, 7.0, 5.0]
    y = [2.0, 3.0, 1.0, 9.0, 4.0]
    base = pearson(x, y).r
    assert -1.0 <= base <= 1.0
    shifted = pearson([3 * v + 11 for v in x], y).r
    assert shifted == pytest.approx(base, abs=1e-12)
    scaled = pearson(x, [0.25 * v - 2 for v in y]).r
    assert scaled == pytest.approx(base, abs=1e-12)


def test_pearson_zero_variance_undefined() -> None:
    result = pearson([1, 1, 1], [1, 2, 3])
    assert not result.defined
    assert math.isnan(result.r)


def test_pearson_length_mismatch() -> None:
    with pytest.raises(ValueError):
        pearson([1, 2], [1, 2, 3])


def _aspect_records() -> list[RatingRecord]:
    records = []
    scores = {"f1": 1, "f2": 2, "f3": 4, "f4": 5}
    for figure, value in scores.items():
        records.append(_rating(figure, value, aspect="helpfulness"))
        records.append(_rating(figure, value, aspect="takeaway"))
        records.append(_rating(figure, 6 - value, aspect="visual_desc"))
    return records


def test_identical_columns_correlate_to_one() -> None:
    table = aspect_correlations(_aspect_records())
    assert table.get("helpfulness", "takeaway").r == pytest.approx(1.0, abs=1e-12)
    assert table.get("helpfulness", "visual_desc").r == pytest.approx(-1.0, abs=1e-12)
    assert table.n_units == 4


def test_correlations_with_extra_variable() -> None:
    lengths = {"f1": 10.0, "f2": 20.0, "f3": 40.0, "f4": 50.0}
    table = aspect_correlations(_aspect_records(), {"length": lengths})
    assert "length" in table.labels
    result = table.get("helpfulness", "length")
    assert result.defined
    assert result.r > 0.9


def test_correlations_listwise_complete() -> None:
    records = _aspect_records()
    records.append(_rating("f5", 3, aspect="helpfulness"))  # missing other aspects
    table = aspect_correlations(records)
    assert table.n_units == 4


def test_correlations_average_annotators() -> None:
    records = [
        _rating("f1", 1),
        RatingRecord("a2", "f1", "caption", "helpfulness", 5),
        _rating("f2", 3),
        RatingRecord("a2", "f2", "caption", "helpfulness", 3),
    ]
    extra = {"x": {"f1": 3.0, "f2": 3.0}}
    table = aspect_correlations(records, extra)
    # Means are (3, 3): zero variance, so the pair is undefined, not 0.
    assert not table.get("helpfulness", "x").defined


# ---------------------------------------------------------------------------
# t tests
# ---------------------------------------------------------------------------


def test_ttest_identical_samples() -> None:
    result = mean_diff_ttest([2.0, 3.0, 4.0], [2.0, 3.0, 4.0])
    assert result.defined
    assert result.statistic == pytest.approx(0.0, abs=1e-12)
    assert result.pvalue == pytest.approx(1.0, abs=1e-12)


def test_ttest_welch_hand_case() -> None:
    result = mean_diff_ttest([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
    assert result.defined
    assert result.statistic == pytest.approx(-3.674, abs=1e-3)
    assert result.df == pytest.approx(4.0, abs=1e-9)
    assert result.pvalue == pytest.approx(0.0214, abs=1e-3)


def test_ttest_paired() -> None:
    a = [1.0, 2.0, 3.0, 4.0]
    b = [2.0, 3.0, 4.0, 6.0]
    result = mean_diff_ttest(a, b, paired=True)
    assert result.defined
    assert result.statistic < 0
    with pytest.raises(ValueError):
        mean_diff_ttest([1.0, 2.0], [1.0, 2.0, 3.0], paired=True)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_ttest_degenerate_flagged() -> None:
    assert not mean_diff_ttest([1.0], [2.0, 3.0]).defined
    # Paired samples with identical differences have zero variance.
    result = mean_diff_ttest([1.0, 2.0, 3.0], [2.0, 3.0, 4.0], paired=True)
    assert not result.defined


# ---------------------------------------------------------------------------
# Rank agreement
# ---------------------------------------------------------------------------


def _ranking(figure: str, order: list[str], annotator: str) -> RankingRecord:
    return RankingRecord(annotator_id=annotator, figure_id=figure, ranking=tuple(order))


def test_rank_agreement_identity() -> None:
    a = [_ranking("f1", ["s1", "s2", "s3"], "a")]
    b = [_ranking("f1", ["s1", "s2", "s3"], "b")]
    result = rank_agreement(a, b)
    assert result.kendall_tau == pytest.approx(1.0, abs=1e-12)
    assert result.spearman_rho == pytest.approx(1.0, abs=1e-12)


def test_rank_agreement_reversal() -> None:
    a = [_ranking("f1", ["s1", "s2", "s3"], "a")]
    b = [_ranking("f1", ["s3", "s2", "s1"], "b")]
    result = rank_agreement(a, b)
    assert result.kendall_tau == pytest.approx(-1.0, abs=1e-12)
    assert result.spearman_rho == pytest.approx(-1.0, abs=1e-12)


def test_rank_agreement_hand_case() -> None:
    # Ranks (1,2,3) vs (2,1,3): one discordant pair of three.
    a = [_ranking("f1", ["s1", "s2", "s3"], "a")]
    b = [_ranking("f1", ["s2", "s1", "s3"], "b")]
    result = rank_agreement(a, b)
    assert result.kendall_tau == pytest.approx(1 / 3, abs=1e-12)
    assert result.spearman_rho == pytest.approx(0.5, abs=1e-12)
    assert result.n_figures == 1


def test_rank_agreement_pools_across_figures() -> None:
    a = [
        _ranking("f1", ["s1", "s2", "s3"], "a"),
        _ranking("f2", ["s1", "s2", "s3"], "a"),
    ]
    b = [
        _ranking("f1", ["s1", "s2", "s3"], "b"),
        _ranking("f2", ["s3", "s2", "s1"], "b"),
    ]
    pooled = rank_agreement(a, b)
    per_figure = rank_agreement(a, b, method="per-figure")
    assert per_figure.kendall_tau == pytest.approx(0.0, abs=1e-12)
    assert pooled.n_figures == 2
    assert -1.0 <= pooled.kendall_tau <= 1.0


def test_rank_agreement_errors() -> None:
    a = [_ranking("f1", ["s1", "s2"], "a")]
    b = [_ranking("f2", ["s1", "s2"], "b")]
    with pytest.raises(ValueError):
        rank_agreement(a, b)
    c = [_ranking("f1", ["s1", "s9"], "b")]
    with pytest.raises(ValueError):
        rank_agreement(a, c)
    with pytest.raises(ValueError):
        rank_agreement(a, a, method="median")


def test_ranking_record_validation() -> None:
    with pytest.raises(ValueError):
        RankingRecord("a", "f1", ("s1", "s1"))
    with pytest.raises(ValueError):
        RankingRecord("a", "f1", ())


# ---------------------------------------------------------------------------
# Worst-vote tallies
# ---------------------------------------------------------------------------


def _votes(figure: str, counts: dict[str, int]) -> list[VoteRecord]:
    votes = []
    n = 0
    for item, count in counts.items():
        for _ in range(count):
            votes.append(VoteRecord(annotator_id=f"w{n}", figure_id=figure, item_id=item))
            n += 1
    return votes


def test_tally_majority_single_winner() -> None:
    tallies = worst_vote_tally(_votes("f1", {"A": 10, "B": 5, "C": 5}))
    assert tallies["A"].times_worst == 1
    assert tallies["B"].times_worst == 0
    assert tallies["C"].times_worst == 0


def test_tally_tie_credits_all() -> None:
    tallies = worst_vote_tally(_votes("f1", {"A": 7, "B": 7, "C": 6}))
    assert tallies["A"].times_worst == 1
    assert tallies["B"].times_worst == 1
    assert tallies["C"].times_worst == 0


def test_tally_mean_votes() -> None:
    votes = _votes("f1", {"A": 4, "B": 2}) + _votes("f2", {"A": 1, "B": 5})
    tallies = worst_vote_tally(votes)
    assert tallies["A"].mean_votes == pytest.approx(2.5)
    assert tallies["B"].mean_votes == pytest.approx(3.5)
    assert tallies["A"].times_worst == 1
    assert tallies["B"].times_worst == 1


def test_tally_credits_cover_figures() -> None:
    votes = _votes("f1", {"A": 2, "B": 2}) + _votes("f2", {"C": 3})
    tallies = worst_vote_tally(votes)
    assert sum(t.times_worst for t in tallies.values()) >= 2


def test_tally_requires_votes() -> None:
    with pytest.raises(ValueError):
        worst_vote_tally([])


# ---------------------------------------------------------------------------
# Missing information
# ---------------------------------------------------------------------------


def test_missing_information_arithmetic() -> None:
    alignment = AlignmentSet(
        pair_id="f1",
        caption_tokens=("a", "b", "c", "d"),
        source_tokens=("a", "b", "c"),
        links=(TokenLink(0, 0), TokenLink(1, 1), TokenLink(2, 2)),
    )
    info = missing_information(alignment)
    assert info.token_count == 1
    assert info.fraction == pytest.approx(0.25)


def test_missing_information_fully_aligned() -> None:
    alignment = align_content_tokens("f1", "model accuracy", "model accuracy improves")
    info = missing_information(alignment)
    assert info.token_count == 0
    assert info.fraction == 0.0


def test_correlate_missing_with_ratings_perfect_line() -> None:
    alignments = []
    records = []
    for i, missing in enumerate((0, 1, 2)):
        caption = ("w",) * 3
        links = tuple(TokenLink(j, j) for j in range(3 - missing))
        alignments.append(
            AlignmentSet(
                pair_id=f"f{i}",
                caption_tokens=caption,
                source_tokens=("w", "w", "w"),
                links=links,
            )
        )
        records.append(_rating(f"f{i}", missing + 1, aspect="visual_desc"))
    out = correlate_missing_with_ratings(alignments, records)
    assert out["visual_desc"]["token_count"].r == pytest.approx(1.0, abs=1e-12)
    assert out["visual_desc"]["fraction"].r == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# Length distributions
# ---------------------------------------------------------------------------


def test_density_integrates_to_one() -> None:
    rng = np.random.default_rng(3)
    groups = {
        "sysA": list(rng.normal(10, 2, size=60)),
        "sysB": list(rng.normal(30, 5, size=45)),
    }
    result = length_distribution(groups)
    assert not result.warnings
    for group in result.groups:
        assert group.density is not None
        assert abs(group.density_integral() - 1.0) <= 1e-3
        assert all(y >= 0 for _, y in group.density)


def test_histogram_counts_sum_to_group_size() -> None:
    groups = {"g": [10.0, 10.4, 11.2, 13.9, 10.1]}
    result = length_distribution(groups)
    histogram = result.groups[0].histogram
    assert sum(count for _, _, count in histogram) == 5
    widths = [hi - lo for lo, hi, _ in histogram]
    assert all(w == pytest.approx(1.0) for w in widths)


def test_identical_lengths_single_bin_and_peak() -> None:
    result = length_distribution({"g": [12.0] * 8})
    group = result.groups[0]
    occupied = [(lo, hi) for lo, hi, count in group.histogram if count]
    assert occupied == [(11.5, 12.5)]
    assert group.density is not None
    peak_x = max(group.density, key=lambda p: p[1])[0]
    assert peak_x == pytest.approx(12.0, abs=0.2)
    assert abs(group.density_integral() - 1.0) <= 1e-3


def test_bimodal_equal_modes() -> None:
    result = length_distribution({"g": [10.0] * 20 + [30.0] * 20})
    density = result.groups[0].density
    assert density is not None

    def density_at(x0: float) -> float:
        return min(density, key=lambda p: abs(p[0] - x0))[1]

    assert density_at(10.0) == pytest.approx(density_at(30.0), rel=1e-6)
    assert density_at(10.0) > density_at(20.0)


def test_empty_and_single_groups_warned() -> None:
    result = length_distribution({"empty": [], "single": [5.0], "full": [1.0, 2.0, 3.0]})
    assert any("empty" in w for w in result.warnings)
    assert any("single" in w for w in result.warnings)
    names = [g.group for g in result.groups]
    assert "empty" not in names
    single = [g for g in result.groups if g.group == "single"][0]
    assert single.density is None
    assert sum(c for _, _, c in single.histogram) == 1


def test_distribution_csv_files(tmp_path) -> None:
    result = length_distribution({"g": [1.0, 2.0, 2.0, 3.0]})
    dist_path = tmp_path / "distribution.csv"
    hist_path = tmp_path / "histogram.csv"
    write_distribution_csv(result, dist_path)
    write_histogram_csv(result, hist_path)
    dist_lines = dist_path.read_text(encoding="utf-8").splitlines()
    hist_lines = hist_path.read_text(encoding="utf-8").splitlines()
    assert dist_lines[0] == "group,x,density"
    assert hist_lines[0] == "group,bin_lo,bin_hi,count"
    assert len(dist_lines) > 1 and len(hist_lines) > 1


# ---------------------------------------------------------------------------
# Record files
# ---------------------------------------------------------------------------


def test_record_files_round_trip(tmp_path) -> None:
    ratings = [
        _rating("f1", 5),
        _rating("f2", 2, valid=False, exclusion_reason="incomplete image"),
    ]
    rankings = [_ranking("f1", ["s1", "s2"], "a")]
    votes = [VoteRecord(annotator_id="a", figure_id="f1", item_id="s2")]
    write_ratings(ratings, tmp_path / "ratings.jsonl")
    write_rankings(rankings, tmp_path / "rankings.jsonl")
    write_votes(votes, tmp_path / "votes.jsonl")
    assert load_ratings(tmp_path / "ratings.jsonl") == ratings
    assert load_rankings(tmp_path / "rankings.jsonl") == rankings
    assert load_votes(tmp_path / "votes.jsonl") == votes


def test_load_ratings_error_location(tmp_path) -> None:
    path = tmp_path / "ratings.jsonl"
    path.write_text(
        '{"annotator_id": "a", "figure_id": "f", "aspect": "helpfulness", "value": 9}\n',
        encoding="utf-8",
    )
    with pytest.raises(ValueError) as err:
        load_ratings(path)
    assert "ratings.jsonl:1" in str(err.value)
