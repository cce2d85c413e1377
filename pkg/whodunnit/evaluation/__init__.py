"""
Evaluation - minority-class metrics, curves, splits, agreement and reports.
"""
from whodunnit.evaluation.agreement import cohen_kappa, minority_percent_agreement
from whodunnit.evaluation.curves import CurvePoint, interval_bounds, interval_curves
from whodunnit.evaluation.metrics import (
    FirstCorrectStats,
    PrfScores,
    final_decile_precision,
    final_decile_start,
    first_correct_index,
    first_correct_stats,
    prf_from_counts,
    prf_from_labels,
    prf_minority,
)
from whodunnit.evaluation.report import SummaryRow, summarize_runs, write_report
from whodunnit.evaluation.splits import Fold, SplitPlan, make_splits
from whodunnit.evaluation.traces import (
    PredictionTrace,
    TraceRecord,
    build_trace,
    read_traces,
    write_traces,
)


__all__ = [
    "CurvePoint",
    "FirstCorrectStats",
    "Fold",
    "PredictionTrace",
    "PrfScores",
    "SplitPlan",
    "SummaryRow",
    "TraceRecord",
    "build_trace",
    "cohen_kappa",
    "final_decile_precision",
    "final_decile_start",
    "first_correct_index",
    "first_correct_stats",
    "interval_bounds",
    "interval_curves",
    "make_splits",
    "minority_percent_agreement",
    "prf_from_counts",
    "prf_from_labels",
    "prf_minority",
    "read_traces",
    "summarize_runs",
    "write_report",
    "write_traces",
]
