"""
Cross-validation folds and the held-out set.
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from whodunnit.errors import SplitError


logger = logging.getLogger(__name__)

HELD_OUT = 6
N_FOLDS = 5
TEST_PER_FOLD = 6


@dataclass(frozen=True)
class Fold:
    train: Tuple[str, ...]
    test: Tuple[str, ...]


@dataclass(frozen=True)
class SplitPlan:
    folds: Tuple[Fold, ...]
    held_out: Tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "held_out": list(self.held_out),
            "folds": [{"train": list(fold.train), "test": list(fold.test)} for fold in self.folds],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SplitPlan":
        try:
            folds = tuple(Fold(tuple(fold["train"]), tuple(fold["test"])) for fold in data["folds"])
            return cls(folds=folds, held_out=tuple(data["held_out"]))
        except (KeyError, TypeError) as exc:
            raise SplitError(f"bad split plan: {exc}") from exc


def make_splits(
    case_ids: Sequence[str],
    seed: int,
    held_out: int = HELD_OUT,
    n_folds: int = N_FOLDS,
    test_per_fold: int = TEST_PER_FOLD,
) -> SplitPlan:
    """
    Draw the held-out cases, then n_folds disjoint test folds from the rest.

    Case ids are sorted before shuffling, so the plan depends only on the
    set of ids and the seed. Each fold trains on every remaining case
    outside its test set.

    Raises:
        SplitError: Fewer than held_out + n_folds * test_per_fold cases,
            or duplicate ids
    """
    ids = sorted(case_ids)
    if len(set(ids)) != len(ids):
        raise SplitError("duplicate case ids")
    needed = held_out + n_folds * test_per_fold
    if len(ids) < needed:
        logger.error("Split plan needs %d cases, got %d", needed, len(ids))
        raise SplitError(f"need at least {needed} cases for the split plan, got {len(ids)}")

    order = [ids[index] for index in np.random.default_rng(seed).permutation(len(ids))]
    held = tuple(order[:held_out])
    remainder = order[held_out:]
    folds: List[Fold] = []
    for fold in range(n_folds):
        test = remainder[fold * test_per_fold:(fold + 1) * test_per_fold]
        train = tuple(case for case in remainder if case not in test)
        folds.append(Fold(train=train, test=tuple(test)))
    logger.debug("Split plan: %d held out, %d folds of %d/%d",
                 len(held), n_folds, len(folds[0].train), test_per_fold)
    return SplitPlan(folds=tuple(folds), held_out=held)
