"""
Summary tables and CSV reports regenerated from persisted traces.
"""
import csv
import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from whodunnit.evaluation.curves import DEFAULT_INTERVALS, interval_curves
from whodunnit.evaluation.metrics import (
    final_decile_precision,
    first_correct_index,
    prf_minority,
)
from whodunnit.evaluation.traces import PredictionTrace


logger = logging.getLogger(__name__)

PARTITIONS = ("cv", "heldout")
SUMMARY_FIELDS = ("model", "T", "V", "A", "cv_pr", "cv_re", "cv_f1", "ho_pr", "ho_re", "ho_f1")
PER_CASE_FIELDS = (
    "model", "modalities", "partition", "fold", "run", "case", "sentences",
    "tp", "fp", "fn", "precision", "recall", "f1", "final_decile_precision", "first_correct",
)
CURVE_FIELDS = (
    "case", "interval", "tp", "cum_tp", "cum_f1",
    "gold", "cum_fp", "model", "modalities", "partition", "fold", "run",
)


@dataclass(frozen=True)
class SummaryRow:
    """Precision, recall and f1 per partition for one model and modality subset."""
    model: str
    modalities: str
    scores: Dict[str, Tuple[float, float, float]]


def _mean_scores(groups: Iterable[Sequence[PredictionTrace]]) -> Optional[Tuple[float, float, float]]:
    scores = [prf_minority(group) for group in groups if group]
    if not scores:
        return None
    return (
        float(np.mean([score.precision for score in scores])),
        float(np.mean([score.recall for score in scores])),
        float(np.mean([score.f1 for score in scores])),
    )


def summarize_runs(traces: Sequence[PredictionTrace], pooled: bool = False) -> List[SummaryRow]:
    """
    Table-shaped summary per (model, modalities).

    Averaged (default): score each (fold, run) separately, average over
    runs within a fold, then over folds. Pooled: pool all folds of a run
    into one score, then average over runs.
    """
    grouped: Dict[Tuple[str, str], Dict[str, list]] = defaultdict(lambda: defaultdict(list))
    for trace in traces:
        grouped[(trace.model, trace.modalities)][trace.partition].append(trace)

    rows = []
    for (model, modalities), partitions in sorted(grouped.items()):
        scores = {}
        for partition in PARTITIONS:
            members = partitions.get(partition, [])
            if not members:
                continue
            if pooled:
                by_run = defaultdict(list)
                for trace in members:
                    by_run[trace.run].append(trace)
                result = _mean_scores(by_run[run] for run in sorted(by_run, key=_sort_key))
            else:
                by_fold = defaultdict(lambda: defaultdict(list))
                for trace in members:
                    by_fold[trace.fold][trace.run].append(trace)
                fold_means = []
                for fold in sorted(by_fold, key=_sort_key):
                    runs = by_fold[fold]
                    fold_means.append(_mean_scores(runs[run] for run in sorted(runs, key=_sort_key)))
                result = tuple(float(np.mean(column)) for column in zip(*fold_means))
            scores[partition] = result
        rows.append(SummaryRow(model=model, modalities=modalities, scores=scores))
    return rows


def _sort_key(value):
    return (value is None, value if value is not None else 0)


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.4f}"


def _blank(value) -> str:
    return "" if value is None else str(value)


def _summary_lines(rows: Sequence[SummaryRow]) -> List[List[str]]:
    lines = []
    for row in rows:
        letters = set(row.modalities.split("+"))
        cells = [row.model] + ["1" if letter in letters else "0" for letter in "TVA"]
        for partition in PARTITIONS:
            values = row.scores.get(partition)
            if values is None:
                cells.extend(["", "", ""])
            else:
                cells.extend(_fmt(value) for value in values)
        lines.append(cells)
    return lines


def _write_csv(path: Path, header: Sequence[str], lines: Iterable[Sequence]) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(lines)


def write_report(output_dir: Path, traces: Sequence[PredictionTrace], n_intervals: int = DEFAULT_INTERVALS) -> None:
    """
    Write summary.csv, summary_pooled.csv, per_case.csv and curves.csv.

    The output depends only on the traces, so regenerating a report from
    traces.jsonl reproduces the files written at evaluation time.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(output_dir / "summary.csv", SUMMARY_FIELDS, _summary_lines(summarize_runs(traces)))
    _write_csv(output_dir / "summary_pooled.csv", SUMMARY_FIELDS,
               _summary_lines(summarize_runs(traces, pooled=True)))

    per_case = []
    curves = []
    for trace in traces:
        labels = [trace.model, trace.modalities, trace.partition, _blank(trace.fold), _blank(trace.run)]
        if len(trace):
            scores = prf_minority([trace])
            per_case.append(labels + [
                trace.case_key, len(trace), scores.tp, scores.fp, scores.fn,
                _fmt(scores.precision), _fmt(scores.recall), _fmt(scores.f1),
                _fmt(final_decile_precision(trace)), _blank(first_correct_index(trace)),
            ])
        for point in interval_curves(trace, n_intervals):
            curves.append([
                trace.case_key, point.interval, point.tp, point.cum_tp, _fmt(point.cum_f1),
                point.gold, point.cum_fp, *labels,
            ])
    _write_csv(output_dir / "per_case.csv", PER_CASE_FIELDS, per_case)
    _write_csv(output_dir / "curves.csv", CURVE_FIELDS, curves)
    logger.info("Wrote report for %d traces to %s", len(traces), output_dir)
