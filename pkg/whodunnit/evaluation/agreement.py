"""
Inter-annotator agreement on binary sentence labels.
"""
from typing import Sequence

import numpy as np

from whodunnit.errors import AgreementError


def _pair(labels_a: Sequence[int], labels_b: Sequence[int]):
    a = np.asarray(labels_a, dtype=np.int64)
    b = np.asarray(labels_b, dtype=np.int64)
    if a.shape != b.shape:
        raise AgreementError(f"label sequences differ in length: {a.size} vs {b.size}")
    if a.size == 0:
        raise AgreementError("agreement of empty label sequences is undefined")
    return a, b


def cohen_kappa(labels_a: Sequence[int], labels_b: Sequence[int]) -> float:
    """
    Cohen's kappa, (p_o - p_e) / (1 - p_e).

    When chance agreement is 1 (both annotators use one and the same
    label throughout) kappa is 1 for identical sequences.

    Raises:
        AgreementError: Length mismatch, empty input, or p_e = 1 with
            differing sequences
    """
    a, b = _pair(labels_a, labels_b)
    categories = np.union1d(a, b)
    observed = float(np.mean(a == b))
    expected = float(sum(np.mean(a == label) * np.mean(b == label) for label in categories))
    if expected == 1.0:
        if np.array_equal(a, b):
            return 1.0
        raise AgreementError("kappa undefined: chance agreement is 1")
    return (observed - expected) / (1.0 - expected)


def minority_percent_agreement(labels_a: Sequence[int], labels_b: Sequence[int]) -> float:
    """
    Share of sentences both annotators mark positive, among those either marks positive.

    Raises:
        AgreementError: Length mismatch, empty input or no positive label at all
    """
    a, b = _pair(labels_a, labels_b)
    either = (a == 1) | (b == 1)
    if not either.any():
        raise AgreementError("no sentence is labeled positive by either annotator")
    return float(np.sum((a == 1) & (b == 1)) / np.sum(either))
