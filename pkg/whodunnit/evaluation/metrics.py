"""
Minority-class metrics over prediction traces.
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from whodunnit.errors import EvaluationError
from whodunnit.evaluation.traces import PredictionTrace


@dataclass(frozen=True)
class PrfScores:
    """
    Precision, recall and f1 of the positive (perpetrator) class.

    A zero denominator yields 0 with the matching degenerate flag set.
    """
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    precision_degenerate: bool = False
    recall_degenerate: bool = False


def prf_from_counts(tp: int, fp: int, fn: int) -> PrfScores:
    precision_degenerate = tp + fp == 0
    recall_degenerate = tp + fn == 0
    precision = 0.0 if precision_degenerate else tp / (tp + fp)
    recall = 0.0 if recall_degenerate else tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0 else 2.0 * precision * recall / (precision + recall)
    return PrfScores(precision, recall, f1, tp, fp, fn, precision_degenerate, recall_degenerate)


def prf_from_labels(predicted: Sequence[int], gold: Sequence[int]) -> PrfScores:
    predicted = np.asarray(predicted, dtype=bool)
    gold = np.asarray(gold, dtype=bool)
    if predicted.shape != gold.shape:
        raise EvaluationError(f"{predicted.size} predictions for {gold.size} gold labels")
    tp = int(np.sum(predicted & gold))
    fp = int(np.sum(predicted & ~gold))
    fn = int(np.sum(~predicted & gold))
    return prf_from_counts(tp, fp, fn)


def prf_minority(traces: Sequence[PredictionTrace]) -> PrfScores:
    """
    Micro-averaged scores over every sentence of every trace.

    Raises:
        EvaluationError: No traces
    """
    if not traces:
        raise EvaluationError("no traces to score")
    return prf_from_labels(
        np.concatenate([trace.predicted for trace in traces]),
        np.concatenate([trace.gold for trace in traces]),
    )


def final_decile_start(length: int) -> int:
    """ceil(0.9 * length) in exact integer arithmetic."""
    return -(-9 * length // 10)


def final_decile_precision(trace: PredictionTrace) -> Optional[float]:
    """
    Precision over the last tenth of a case.

    Returns:
        Precision of sentences with seq_index >= ceil(0.9 T), or None when
        no positive prediction falls in that window
    """
    window = trace.seq_indices >= final_decile_start(len(trace))
    predicted = trace.predicted[window].astype(bool)
    if not predicted.any():
        return None
    return float(np.sum(predicted & trace.gold[window].astype(bool)) / np.sum(predicted))


def first_correct_index(trace: PredictionTrace) -> Optional[int]:
    """Smallest seq_index predicted 1 with gold 1, or None."""
    hits = np.flatnonzero((trace.predicted == 1) & (trace.gold == 1))
    return int(trace.seq_indices[hits[0]]) if hits.size else None


@dataclass(frozen=True)
class FirstCorrectStats:
    minimum: Optional[int]
    maximum: Optional[int]
    average: Optional[float]
    found: int
    missing: int


def first_correct_stats(traces: Sequence[PredictionTrace]) -> FirstCorrectStats:
    """min / max / mean first-correct index, skipping traces without a true positive."""
    indices = [first_correct_index(trace) for trace in traces]
    found = [index for index in indices if index is not None]
    if not found:
        return FirstCorrectStats(None, None, None, 0, len(indices))
    return FirstCorrectStats(
        minimum=min(found),
        maximum=max(found),
        average=float(np.mean(found)),
        found=len(found),
        missing=len(indices) - len(found),
    )
