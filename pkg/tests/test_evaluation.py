"""
Tests for metrics, curves, splits, agreement, traces and reports.
"""
import csv

import numpy as np
import pytest

from whodunnit.errors import AgreementError, EvaluationError, SplitError
from whodunnit.evaluation import (
    SplitPlan,
    build_trace,
    cohen_kappa,
    final_decile_precision,
    final_decile_start,
    first_correct_index,
    first_correct_stats,
    interval_bounds,
    interval_curves,
    make_splits,
    minority_percent_agreement,
    prf_from_counts,
    prf_minority,
    read_traces,
    summarize_runs,
    write_report,
    write_traces,
)


def trace(predicted, gold, case_key="e1/1", **labels):
    return build_trace(case_key, [0.9 if p else 0.1 for p in predicted], predicted, gold, **labels)


def random_trace(rng, length, case_key="e1/1", **labels):
    gold = (rng.random(length) < 0.2).astype(int)
    predicted = (rng.random(length) < 0.3).astype(int)
    return trace(predicted, gold, case_key, **labels)


def read_csv(path):
    with path.open(newline="") as handle:
        return list(csv.reader(handle))


class TestPrfMinority:
    """Tests for prf_minority function."""

    def test_example(self):
        """Test preds [1,0,1] against gold [1,0,0]."""
        scores = prf_minority([trace([1, 0, 1], [1, 0, 0])])
        assert scores.precision == pytest.approx(0.5)
        assert scores.recall == pytest.approx(1.0)
        assert scores.f1 == pytest.approx(2 / 3)

    def test_no_positive_predictions(self):
        """Test the degenerate precision flag."""
        scores = prf_minority([trace([0, 0, 0], [1, 0, 1])])
        assert (scores.precision, scores.recall, scores.f1) == (0.0, 0.0, 0.0)
        assert scores.precision_degenerate
        assert not scores.recall_degenerate

    def test_no_gold_positives(self):
        """Test the degenerate recall flag."""
        scores = prf_from_counts(tp=0, fp=2, fn=0)
        assert scores.recall == 0.0 and scores.recall_degenerate

    def test_perfect(self):
        """Test perfect predictions."""
        scores = prf_minority([trace([1, 0, 1], [1, 0, 1])])
        assert (scores.precision, scores.recall, scores.f1) == (1.0, 1.0, 1.0)

    def test_pooled_and_permutation_invariant(self):
        """Test that traces are pooled and their order does not matter."""
        rng = np.random.default_rng(0)
        traces = [random_trace(rng, 30, f"e{k}/1") for k in range(5)]
        forward = prf_minority(traces)
        backward = prf_minority(list(reversed(traces)))
        assert forward == backward
        if forward.precision + forward.recall:
            harmonic = 2 * forward.precision * forward.recall / (forward.precision + forward.recall)
            assert forward.f1 == pytest.approx(harmonic)

    def test_no_traces(self):
        """Test that an empty trace list raises EvaluationError."""
        with pytest.raises(EvaluationError):
            prf_minority([])


class TestFinalDecilePrecision:
    """Tests for final_decile_precision function."""

    def test_example(self):
        """Test one correct and one incorrect positive in the last ten of 100."""
        predicted = [0] * 100
        gold = [0] * 100
        predicted[92] = predicted[95] = 1
        gold[92] = 1
        assert final_decile_precision(trace(predicted, gold)) == pytest.approx(0.5)

    def test_positives_outside_window(self):
        """Test that positives before the window are ignored."""
        predicted = [1] * 89 + [0] * 11
        assert final_decile_precision(trace(predicted, [1] * 100)) is None

    def test_zero(self):
        """Test a window whose positives are all wrong."""
        assert final_decile_precision(trace([0] * 9 + [1], [1] * 9 + [0])) == 0.0

    def test_window_start(self):
        """Test ceil(0.9 T) for small and exact lengths."""
        assert final_decile_start(100) == 90
        assert final_decile_start(7) == 7
        assert final_decile_start(11) == 10


class TestIntervalCurves:
    """Tests for interval_bounds and interval_curves functions."""

    def test_bounds_are_even(self):
        """Test that interval sizes differ by at most one."""
        for length in (0, 1, 7, 99, 100, 101, 553):
            sizes = np.diff(interval_bounds(length, 100))
            assert sizes.sum() == length
            assert sizes.max() - sizes.min() <= 1

    def test_random_traces(self):
        """Test end point, tp total and monotonicity on 100 random traces."""
        rng = np.random.default_rng(1)
        for _ in range(100):
            item = random_trace(rng, int(rng.integers(1, 400)))
            points = interval_curves(item)
            assert len(points) == 100
            scores = prf_minority([item])
            assert points[-1].cum_f1 == pytest.approx(scores.f1)
            assert sum(point.tp for point in points) == scores.tp
            cumulative = [point.cum_tp for point in points]
            assert cumulative == sorted(cumulative)

    def test_all_zero_predictions(self):
        """Test flat zero curves."""
        points = interval_curves(trace([0] * 10, [1] * 10), n_intervals=5)
        assert all(point.tp == 0 and point.cum_tp == 0 and point.cum_f1 == 0.0 for point in points)
        assert [point.gold for point in points] == [2] * 5

    def test_short_trace(self):
        """Test a trace shorter than the interval count."""
        points = interval_curves(trace([1, 1], [1, 0]), n_intervals=4)
        assert [point.tp for point in points] == [0, 1, 0, 0]
        assert points[-1].cum_fp == 1


class TestFirstCorrect:
    """Tests for first_correct_index and first_correct_stats functions."""

    def test_index(self):
        """Test a first true positive at index 5."""
        predicted = [1, 0, 0, 0, 0, 1, 1]
        gold = [0, 0, 1, 0, 0, 1, 1]
        assert first_correct_index(trace(predicted, gold)) == 5

    def test_none(self):
        """Test a trace without true positives."""
        assert first_correct_index(trace([1, 0], [0, 1])) is None

    def test_stats_skip_missing(self):
        """Test min, max and mean over traces that have a true positive."""
        traces = [
            trace([0, 1], [0, 1]),
            trace([0, 0, 0, 1], [0, 0, 0, 1]),
            trace([1], [0]),
        ]
        stats = first_correct_stats(traces)
        assert (stats.minimum, stats.maximum, stats.average) == (1, 3, 2.0)
        assert (stats.found, stats.missing) == (2, 1)

    def test_stats_none_found(self):
        """Test that nothing found gives empty statistics."""
        stats = first_correct_stats([trace([0], [1])])
        assert stats.average is None and stats.missing == 1


class TestMakeSplits:
    """Tests for make_splits function."""

    CASES = [f"ep{k:02d}/1" for k in range(59)]

    def test_default_sizes(self):
        """Test 59 cases: 6 held out, folds of 47 train and 6 test."""
        plan = make_splits(self.CASES, seed=0)
        assert len(plan.held_out) == 6
        assert len(plan.folds) == 5
        for fold in plan.folds:
            assert len(fold.train) == 47
            assert len(fold.test) == 6
            assert not set(fold.train) & set(fold.test)
            assert not set(plan.held_out) & (set(fold.train) | set(fold.test))

    def test_test_sets_disjoint(self):
        """Test that fold test sets are pairwise disjoint."""
        plan = make_splits(self.CASES, seed=3)
        tests = [set(fold.test) for fold in plan.folds]
        assert len(set.union(*tests)) == 30

    def test_deterministic(self):
        """Test that the plan depends on the seed and the id set only."""
        assert make_splits(self.CASES, seed=4) == make_splits(list(reversed(self.CASES)), seed=4)

    def test_seeds_change_membership_not_sizes(self):
        """Test that another seed reshuffles without resizing."""
        first = make_splits(self.CASES, seed=1)
        second = make_splits(self.CASES, seed=2)
        assert first != second
        assert [len(fold.train) for fold in first.folds] == [len(fold.train) for fold in second.folds]

    def test_too_few(self):
        """Test that fewer cases than the plan needs raise SplitError."""
        with pytest.raises(SplitError):
            make_splits(self.CASES[:35], seed=0)

    def test_duplicates(self):
        """Test that duplicate ids raise SplitError."""
        with pytest.raises(SplitError):
            make_splits(self.CASES + self.CASES[:1], seed=0)

    def test_small_plan(self):
        """Test configurable sizes."""
        plan = make_splits(["a", "b", "c", "d", "e"], seed=0, held_out=1, n_folds=2, test_per_fold=2)
        assert len(plan.held_out) == 1
        assert [len(fold.train) for fold in plan.folds] == [2, 2]

    def test_dict_form(self):
        """Test the JSON-ready form restores the plan."""
        plan = make_splits(self.CASES, seed=5)
        assert SplitPlan.from_dict(plan.to_dict()) == plan
        with pytest.raises(SplitError):
            SplitPlan.from_dict({"folds": []})


class TestAgreement:
    """Tests for cohen_kappa and minority_percent_agreement functions."""

    def test_identical(self):
        """Test that identical sequences give kappa 1."""
        assert cohen_kappa([1, 0, 0, 1], [1, 0, 0, 1]) == pytest.approx(1.0)

    def test_two_by_two(self):
        """Test agreement counts [[45, 5], [5, 45]]."""
        a = [1] * 50 + [0] * 50
        b = [1] * 45 + [0] * 5 + [1] * 5 + [0] * 45
        assert cohen_kappa(a, b) == pytest.approx(0.8)

    def test_single_label(self):
        """Test that one shared label throughout counts as full agreement."""
        assert cohen_kappa([0, 0, 0], [0, 0, 0]) == 1.0

    def test_errors(self):
        """Test length mismatch and empty input."""
        with pytest.raises(AgreementError):
            cohen_kappa([1, 0], [1])
        with pytest.raises(AgreementError):
            cohen_kappa([], [])

    def test_minority_percent(self):
        """Test positive overlap over the union of positives."""
        assert minority_percent_agreement([1, 1, 0, 0], [1, 0, 1, 0]) == pytest.approx(1 / 3)
        with pytest.raises(AgreementError):
            minority_percent_agreement([0, 0], [0, 0])


class TestTraces:
    """Tests for build_trace, write_traces and read_traces functions."""

    def test_build(self):
        """Test positions and labels of a built trace."""
        item = build_trace("e1/2", [0.2, 0.7], [0, 1], [0, 1], model="mlp", fold=1, run=0)
        assert list(item.seq_indices) == [0, 1]
        assert item.model == "mlp" and item.fold == 1
        assert item.records[1].probability == pytest.approx(0.7)

    def test_length_mismatch(self):
        """Test that inputs of different lengths raise EvaluationError."""
        with pytest.raises(EvaluationError):
            build_trace("e1/1", [0.5], [1, 0], [1, 0])

    def test_write_and_read(self, tmp_path):
        """Test that persisted traces read back equal."""
        traces = [trace([1, 0], [1, 1], "e1/1", fold=0, run=0), trace([0], [0], "e2/1", partition="heldout")]
        path = tmp_path / "out" / "traces.jsonl"
        write_traces(path, traces)
        assert read_traces(path) == traces

    def test_malformed_line(self, tmp_path):
        """Test that a broken line raises EvaluationError."""
        path = tmp_path / "traces.jsonl"
        path.write_text("{not json\n", encoding="utf-8")
        with pytest.raises(EvaluationError):
            read_traces(path)

    def test_missing_file(self, tmp_path):
        """Test that a missing file raises EvaluationError."""
        with pytest.raises(EvaluationError):
            read_traces(tmp_path / "absent.jsonl")


class TestReport:
    """Tests for summarize_runs and write_report functions."""

    def make_traces(self):
        return [
            trace([1, 0, 1], [1, 0, 0], "e1/1", fold=0, run=0),
            trace([1, 0], [1, 0], "e2/1", fold=0, run=1),
            trace([0, 1], [1, 1], "e3/1", fold=1, run=0),
        ]

    def test_averaged_summary(self):
        """Test averaging over runs within a fold, then over folds."""
        (row,) = summarize_runs(self.make_traces())
        assert (row.model, row.modalities) == ("lstm", "T+V+A")
        np.testing.assert_allclose(row.scores["cv"], (0.875, 0.75, 0.75))
        assert "heldout" not in row.scores

    def test_pooled_summary(self):
        """Test pooling folds within a run, then averaging over runs."""
        (row,) = summarize_runs(self.make_traces(), pooled=True)
        np.testing.assert_allclose(row.scores["cv"], (5 / 6, 5 / 6, 5 / 6))

    def test_rows_per_model_and_modalities(self):
        """Test one summary row per model and modality subset."""
        traces = self.make_traces() + [
            trace([1], [1], "e4/1", model="pro", modalities="T", partition="heldout", run=0),
        ]
        rows = summarize_runs(traces)
        assert [(row.model, row.modalities) for row in rows] == [("lstm", "T+V+A"), ("pro", "T")]
        assert rows[1].scores["heldout"] == (1.0, 1.0, 1.0)

    def test_files(self, tmp_path):
        """Test the summary, per-case and curve files."""
        write_report(tmp_path, self.make_traces(), n_intervals=2)
        summary = read_csv(tmp_path / "summary.csv")
        assert summary[0] == ["model", "T", "V", "A", "cv_pr", "cv_re", "cv_f1", "ho_pr", "ho_re", "ho_f1"]
        assert summary[1] == ["lstm", "1", "1", "1", "0.8750", "0.7500", "0.7500", "", "", ""]
        pooled = read_csv(tmp_path / "summary_pooled.csv")
        assert pooled[1][4:7] == ["0.8333", "0.8333", "0.8333"]

        per_case = read_csv(tmp_path / "per_case.csv")
        assert len(per_case) == 4
        assert per_case[1][5:13] == ["e1/1", "3", "1", "1", "0", "0.5000", "1.0000", "0.6667"]

        curves = read_csv(tmp_path / "curves.csv")
        assert curves[0][:5] == ["case", "interval", "tp", "cum_tp", "cum_f1"]
        assert len(curves) == 1 + 3 * 2

    def test_regenerated_report_is_identical(self, tmp_path):
        """Test that a report rebuilt from persisted traces matches byte for byte."""
        traces = self.make_traces()
        write_report(tmp_path / "first", traces)
        write_traces(tmp_path / "traces.jsonl", traces)
        write_report(tmp_path / "second", read_traces(tmp_path / "traces.jsonl"))
        for name in ("summary.csv", "summary_pooled.csv", "per_case.csv", "curves.csv"):
            assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()
