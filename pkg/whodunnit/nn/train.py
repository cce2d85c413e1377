"""
Mini-batch training loop shared by every trainable tagger.
"""
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import numpy as np

from whodunnit.errors import ModelError
from whodunnit.evaluation.metrics import prf_from_labels
from whodunnit.nn.adam import AdamMoments, adam_step
from whodunnit.nn.config import TrainConfig
from whodunnit.nn.model import CaseBundles, Tagger, gold_labels
from whodunnit.nn.params import TensorSet


logger = logging.getLogger(__name__)

EPOCH_LOG_FIELDS = ("run", "epoch", "loss", "precision", "recall", "f1")


@dataclass(frozen=True)
class EpochRecord:
    run: int
    epoch: int
    loss: float
    precision: float
    recall: float
    f1: float


@dataclass
class RunResult:
    """Best checkpoint of one seeded run."""
    run: int
    best_epoch: int
    best_f1: float
    params: TensorSet
    epochs: List[EpochRecord] = field(default_factory=list)


@dataclass
class TrainResult:
    runs: List[RunResult]

    @property
    def mean_best_f1(self) -> float:
        return float(np.mean([run.best_f1 for run in self.runs]))

    @property
    def epoch_records(self) -> List[EpochRecord]:
        return [record for run in self.runs for record in run.epochs]


def run_rng(seed: int, run: int) -> np.random.Generator:
    """Generator of one run; every random draw of the run comes from it."""
    return np.random.default_rng([seed, run])


def evaluate_cases(tagger: Tagger, params: TensorSet, cases: Sequence[CaseBundles]):
    """Pooled minority-class precision, recall and f1 of a tagger on cases."""
    predicted = [tagger.predict_case(params, case)[1] for case in cases]
    gold = [gold_labels(case) for case in cases]
    return prf_from_labels(np.concatenate(predicted), np.concatenate(gold))


def train(
    tagger: Tagger,
    train_cases: Sequence[CaseBundles],
    test_cases: Sequence[CaseBundles],
    config: TrainConfig,
    on_epoch: Optional[Callable[[EpochRecord], None]] = None,
) -> TrainResult:
    """
    Train config.runs independently seeded models.

    Each epoch shuffles the training cases, accumulates gradients over
    mini-batches of batch_cases cases and takes one ADAM step per batch,
    then scores minority-class f1 on the test cases. The parameters of the
    best-scoring epoch are kept (the earliest one on ties).

    Raises:
        ModelError: Empty training set
        NonFiniteLossError: A case produced a non-finite loss
    """
    if not train_cases:
        raise ModelError("training set is empty")
    use_dropout = getattr(tagger, "dropout", 0.0) > 0.0
    runs = []
    for run in range(config.runs):
        rng = run_rng(config.seed, run)
        params = tagger.init_params(rng)
        moments = AdamMoments.zeros(params)
        step_index = 0
        result = RunResult(run=run, best_epoch=0, best_f1=-1.0, params=params)

        for epoch in range(1, config.epochs + 1):
            order = rng.permutation(len(train_cases))
            weighted_loss = 0.0
            seen = 0
            for start in range(0, len(order), config.batch_cases):
                batch = [train_cases[index] for index in order[start:start + config.batch_cases]]
                loss, grads = tagger.loss_and_grads(params, batch, rng if use_dropout else None)
                step_index += 1
                params, moments = adam_step(
                    params, grads, moments, step_index,
                    learning_rate=config.learning_rate,
                    beta1=config.beta1,
                    beta2=config.beta2,
                    epsilon=config.epsilon,
                )
                sentences = sum(len(case) for case in batch)
                weighted_loss += loss * sentences
                seen += sentences

            scores = evaluate_cases(tagger, params, test_cases) if test_cases else None
            record = EpochRecord(
                run=run,
                epoch=epoch,
                loss=weighted_loss / max(seen, 1),
                precision=scores.precision if scores else 0.0,
                recall=scores.recall if scores else 0.0,
                f1=scores.f1 if scores else 0.0,
            )
            result.epochs.append(record)
            if on_epoch is not None:
                on_epoch(record)
            logger.debug("run %d epoch %d: loss %.4f f1 %.4f", run, epoch, record.loss, record.f1)
            if record.f1 > result.best_f1:
                result.best_f1 = record.f1
                result.best_epoch = epoch
                result.params = params
        logger.info("Run %d: best f1 %.4f at epoch %d", run, result.best_f1, result.best_epoch)
        runs.append(result)

    outcome = TrainResult(runs=runs)
    logger.info("Mean best f1 over %d runs: %.4f", len(runs), outcome.mean_best_f1)
    return outcome


def write_epoch_log(path: Path, records: Sequence[EpochRecord]) -> None:
    """CSV with columns run,epoch,loss,precision,recall,f1."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(EPOCH_LOG_FIELDS)
        for record in records:
            writer.writerow([
                record.run, record.epoch, f"{record.loss:.6f}",
                f"{record.precision:.6f}", f"{record.recall:.6f}", f"{record.f1:.6f}",
            ])
