"""
JSON-lines interchange format: one SentenceUnit per line.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional

from whodunnit.corpus.constants import INTERCHANGE_FIELDS
from whodunnit.corpus.types import (
    Case,
    CrimeType,
    SentenceKind,
    SentenceUnit,
    TokenLabel,
    case_key,
)
from whodunnit.errors import CorpusError, InterchangeError


logger = logging.getLogger(__name__)


def unit_to_record(unit: SentenceUnit) -> Dict[str, Any]:
    """Convert a unit to its interchange dictionary."""
    return {
        "episode_id": unit.episode_id,
        "case_id": unit.case_id,
        "seq_index": unit.seq_index,
        "kind": unit.kind.value,
        "speaker": unit.speaker,
        "tokens": list(unit.tokens),
        "token_labels": [TokenLabel(label).value for label in unit.token_labels],
        "gold_label": unit.gold_label,
        "start_ms": unit.start_ms,
        "end_ms": unit.end_ms,
    }


def record_to_unit(record: Mapping[str, Any]) -> SentenceUnit:
    """
    Build and validate a unit from an interchange dictionary.

    Raises:
        InterchangeError: Missing/unknown keys, bad enum values or a
            violated SentenceUnit invariant
    """
    keys = set(record)
    expected = set(INTERCHANGE_FIELDS)
    if keys != expected:
        missing = sorted(expected - keys)
        unknown = sorted(keys - expected)
        raise InterchangeError(f"bad interchange keys: missing={missing} unknown={unknown}")
    try:
        unit = SentenceUnit(
            episode_id=str(record["episode_id"]),
            case_id=None if record["case_id"] is None else int(record["case_id"]),
            seq_index=int(record["seq_index"]),
            kind=SentenceKind(record["kind"]),
            speaker=record["speaker"],
            tokens=[str(token) for token in record["tokens"]],
            token_labels=[TokenLabel(label) for label in record["token_labels"]],
            gold_label=int(record["gold_label"]),
            start_ms=None if record["start_ms"] is None else int(record["start_ms"]),
            end_ms=None if record["end_ms"] is None else int(record["end_ms"]),
        )
        unit.validate()
    except (ValueError, TypeError) as exc:
        raise InterchangeError(f"invalid interchange record: {exc}") from exc
    except CorpusError as exc:
        raise InterchangeError(str(exc)) from exc
    return unit


def dumps_units(units: Iterable[SentenceUnit]) -> str:
    """Serialize units to interchange text (one JSON object per line)."""
    return "".join(
        json.dumps(unit_to_record(unit), ensure_ascii=False, sort_keys=False) + "\n"
        for unit in units
    )


def loads_units(text: str) -> List[SentenceUnit]:
    """
    Parse interchange text and check per-episode ordering.

    Raises:
        InterchangeError: Bad JSON, bad record, or seq_index not strictly
            increasing within an episode
    """
    units: List[SentenceUnit] = []
    last_index: Dict[str, int] = {}
    for line_number, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InterchangeError(f"line {line_number}: {exc}") from exc
        if not isinstance(record, dict):
            raise InterchangeError(f"line {line_number}: expected a JSON object")
        unit = record_to_unit(record)
        previous = last_index.get(unit.episode_id)
        if previous is not None and unit.seq_index <= previous:
            raise InterchangeError(
                f"line {line_number}: seq_index {unit.seq_index} does not increase in {unit.episode_id}")
        last_index[unit.episode_id] = unit.seq_index
        units.append(unit)
    return units


def write_interchange(path: Path, units: Iterable[SentenceUnit]) -> None:
    """Write units to a JSON-lines file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_units(units), encoding="utf-8")
    logger.debug("Wrote interchange file %s", path)


def read_interchange(path: Path) -> List[SentenceUnit]:
    """Read and validate a JSON-lines interchange file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InterchangeError(f"cannot read {path}: {exc}") from exc
    units = loads_units(text)
    logger.debug("Read %d units from %s", len(units), path)
    return units


def read_case_index(path: Path) -> Dict[str, CrimeType]:
    """
    Read the optional case index (``{episode_id, case_id, crime_type}`` per line).

    Returns:
        Mapping from case key to crime type
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InterchangeError(f"cannot read {path}: {exc}") from exc
    crime_types: Dict[str, CrimeType] = {}
    for line_number, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            key = case_key(str(record["episode_id"]), int(record["case_id"]))
            crime_types[key] = CrimeType(record["crime_type"])
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
            raise InterchangeError(f"{path} line {line_number}: {exc}") from exc
    return crime_types


def write_case_index(path: Path, cases: Iterable[Case]) -> None:
    """Write the case index for a list of cases."""
    lines = [
        json.dumps({"episode_id": case.episode_id, "case_id": case.case_id,
                    "crime_type": case.crime_type.value})
        for case in cases
    ]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def build_cases(units: Iterable[SentenceUnit],
                crime_types: Optional[Mapping[str, CrimeType]] = None) -> List[Case]:
    """
    Group annotated units into cases.

    Units with case_id None ("irrelevant") belong to no case. Cases come
    back in order of first appearance; sentences keep seq_index order.
    """
    crime_types = crime_types or {}
    cases: Dict[str, Case] = {}
    for unit in units:
        if unit.case_id is None:
            continue
        probe = Case(episode_id=unit.episode_id, case_id=unit.case_id)
        case = cases.get(probe.key)
        if case is None:
            probe.crime_type = crime_types.get(probe.key, CrimeType.OTHER)
            case = cases[probe.key] = probe
        case.sentences.append(unit)
    for case in cases.values():
        case.sentences.sort(key=lambda unit: unit.seq_index)
    return list(cases.values())
