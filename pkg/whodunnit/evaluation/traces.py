"""
Prediction traces: per-sentence model output over one case.
"""
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from whodunnit.errors import EvaluationError


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TraceRecord:
    """One sentence: 0-based position in its case, p(label 1), decision, gold."""
    seq_index: int
    probability: float
    predicted: int
    gold: int


@dataclass
class PredictionTrace:
    """
    Model behaviour over one case, in sentence order.

    ``partition`` is ``cv`` for the test fold of a cross-validation split
    and ``heldout`` for the held-out cases.
    """
    case_key: str
    records: List[TraceRecord]
    model: str = "lstm"
    modalities: str = "T+V+A"
    partition: str = "cv"
    fold: Optional[int] = None
    run: Optional[int] = None

    def __len__(self) -> int:
        return len(self.records)

    @property
    def predicted(self) -> np.ndarray:
        return np.array([record.predicted for record in self.records], dtype=np.int64)

    @property
    def gold(self) -> np.ndarray:
        return np.array([record.gold for record in self.records], dtype=np.int64)

    @property
    def seq_indices(self) -> np.ndarray:
        return np.array([record.seq_index for record in self.records], dtype=np.int64)


def build_trace(
    case_key: str,
    probabilities: Sequence[float],
    predicted: Sequence[int],
    gold: Sequence[int],
    **labels,
) -> PredictionTrace:
    """Assemble a trace; positions are numbered from 0 in the given order."""
    if not len(probabilities) == len(predicted) == len(gold):
        raise EvaluationError(f"{case_key}: probabilities, predictions and gold differ in length")
    records = [
        TraceRecord(seq_index=position, probability=float(p), predicted=int(y_hat), gold=int(y))
        for position, (p, y_hat, y) in enumerate(zip(probabilities, predicted, gold))
    ]
    return PredictionTrace(case_key=case_key, records=records, **labels)


def trace_to_dict(trace: PredictionTrace) -> dict:
    return asdict(trace)


def trace_from_dict(data: dict) -> PredictionTrace:
    try:
        records = [TraceRecord(**record) for record in data["records"]]
        fields = {key: value for key, value in data.items() if key != "records"}
        return PredictionTrace(records=records, **fields)
    except (KeyError, TypeError) as exc:
        raise EvaluationError(f"bad trace record: {exc}") from exc


def write_traces(path: Path, traces: Iterable[PredictionTrace]) -> None:
    """JSON lines, one trace per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8") as handle:
        for trace in traces:
            handle.write(json.dumps(trace_to_dict(trace), sort_keys=True) + "\n")
            count += 1
    logger.info("Wrote %d traces to %s", count, path)


def read_traces(path: Path) -> List[PredictionTrace]:
    """
    Raises:
        EvaluationError: Unreadable file or malformed line
    """
    traces = []
    try:
        with Path(path).open(encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, 1):
                if not line.strip():
                    continue
                try:
                    traces.append(trace_from_dict(json.loads(line)))
                except json.JSONDecodeError as exc:
                    raise EvaluationError(f"{path} line {line_number}: {exc}") from exc
    except OSError as exc:
        raise EvaluationError(f"cannot read traces {path}: {exc}") from exc
    return traces
