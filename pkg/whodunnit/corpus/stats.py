"""
Corpus statistics per case.
"""
import logging
from collections import Counter
from typing import Callable, Dict, List, Sequence

import numpy as np

from whodunnit.corpus.types import (
    Case,
    CrimeType,
    SentenceKind,
    StatsRow,
    StatsTable,
)
from whodunnit.errors import CorpusError


logger = logging.getLogger(__name__)


_ROWS: Dict[str, Callable[[Case], int]] = {
    "sentences": lambda case: len(case.sentences),
    "sentences_with_perpetrator": lambda case: sum(unit.gold_label for unit in case.sentences),
    "scene_descriptions": lambda case: sum(
        unit.kind is SentenceKind.SCENE_DESCRIPTION for unit in case.sentences),
    "spoken_utterances": lambda case: sum(
        unit.kind is SentenceKind.UTTERANCE for unit in case.sentences),
    "characters": lambda case: len({unit.speaker for unit in case.sentences if unit.speaker is not None}),
}


def corpus_stats(cases: Sequence[Case]) -> StatsTable:
    """
    Compute per-case min/max/mean statistics.

    Characters are counted as distinct speaker strings within a case.

    Args:
        cases: At least one case

    Returns:
        StatsTable with one row per quantity plus crime-type counts

    Raises:
        CorpusError: Empty case list
    """
    if not cases:
        raise CorpusError("corpus statistics need at least one case")

    rows: Dict[str, StatsRow] = {}
    for name, count in _ROWS.items():
        values = np.array([count(case) for case in cases], dtype=np.float64)
        rows[name] = StatsRow(minimum=float(values.min()), maximum=float(values.max()),
                              average=float(values.mean()))

    crime_counts = Counter(case.crime_type for case in cases)
    cases_per_episode = Counter(case.episode_id for case in cases)
    table = StatsTable(
        rows=rows,
        crime_types={crime: crime_counts.get(crime, 0) for crime in CrimeType},
        episodes_with_one_case=sum(1 for n in cases_per_episode.values() if n == 1),
        episodes_with_two_cases=sum(1 for n in cases_per_episode.values() if n == 2),
        total_cases=len(cases),
    )
    logger.debug("Computed statistics over %d cases", len(cases))
    return table


def stats_rows_for_csv(table: StatsTable) -> List[List[str]]:
    """Flatten a StatsTable into CSV rows (quantity, min, max, avg)."""
    out = [["quantity", "min", "max", "avg"]]
    for name, row in table.rows.items():
        out.append([name, f"{row.minimum:g}", f"{row.maximum:g}", f"{row.average:.4f}"])
    for crime, count in table.crime_types.items():
        out.append([f"crime_{crime.value}", str(count), "", ""])
    return out
