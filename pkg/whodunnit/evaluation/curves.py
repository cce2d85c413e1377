"""
Interval curves: how true positives and f1 accumulate over a case.
"""
from dataclasses import dataclass
from typing import List

import numpy as np

from whodunnit.evaluation.metrics import prf_from_counts
from whodunnit.evaluation.traces import PredictionTrace


DEFAULT_INTERVALS = 100


@dataclass(frozen=True)
class CurvePoint:
    interval: int
    tp: int
    gold: int
    cum_tp: int
    cum_fp: int
    cum_f1: float


def interval_bounds(length: int, n_intervals: int = DEFAULT_INTERVALS) -> np.ndarray:
    """Boundaries k * T // n (k = 0..n); interval sizes differ by at most one."""
    return np.arange(n_intervals + 1) * length // n_intervals


def interval_curves(trace: PredictionTrace, n_intervals: int = DEFAULT_INTERVALS) -> List[CurvePoint]:
    """
    Per-interval and cumulative counts over n equal slices of a trace.

    Intervals may be empty when the case is shorter than n_intervals.
    The cumulative f1 at interval k covers all sentences in intervals
    0..k, so the last point equals the f1 of the whole trace.
    """
    bounds = interval_bounds(len(trace), n_intervals)
    predicted = trace.predicted.astype(bool)
    gold = trace.gold.astype(bool)
    hits = predicted & gold
    points = []
    cum_tp = cum_fp = cum_fn = 0
    for interval in range(n_intervals):
        piece = slice(bounds[interval], bounds[interval + 1])
        tp = int(hits[piece].sum())
        cum_tp += tp
        cum_fp += int((predicted[piece] & ~gold[piece]).sum())
        cum_fn += int((~predicted[piece] & gold[piece]).sum())
        points.append(CurvePoint(
            interval=interval,
            tp=tp,
            gold=int(gold[piece].sum()),
            cum_tp=cum_tp,
            cum_fp=cum_fp,
            cum_f1=prf_from_counts(cum_tp, cum_fp, cum_fn).f1,
        ))
    return points
