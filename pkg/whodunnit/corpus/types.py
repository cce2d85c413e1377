"""
Canonical data model: sentences, caption cues, cases and corpus statistics.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence

from whodunnit.errors import CorpusError


class SentenceKind(str, Enum):
    """Whether a sentence is spoken or describes what the camera sees."""
    UTTERANCE = "utterance"
    SCENE_DESCRIPTION = "scene_description"


class TokenLabel(str, Enum):
    """Gold entity label of a single token."""
    PERPETRATOR = "perpetrator"
    SUSPECT = "suspect"
    OTHER = "other"
    NONE = "none"


class CrimeType(str, Enum):
    """Crime category of a case."""
    MURDER = "murder"
    ACCIDENT = "accident"
    SUICIDE = "suicide"
    OTHER = "other"


def derive_sentence_label(token_labels: Sequence[TokenLabel]) -> int:
    """
    Derive the sentence-level gold label from token labels.

    A sentence mentions the perpetrator if any of its tokens does.

    Args:
        token_labels: Per-token labels (may be empty)

    Returns:
        1 if some token is labeled Perpetrator, else 0
    """
    return int(any(TokenLabel(label) is TokenLabel.PERPETRATOR for label in token_labels))


def case_key(episode_id: str, case_id: Optional[int]) -> str:
    """Stable string key of a case, e.g. ``s03e03/1``."""
    return f"{episode_id}/{case_id}"


@dataclass
class SentenceUnit:
    """One screenplay sentence (utterance or scene description)."""
    episode_id: str
    case_id: Optional[int]
    seq_index: int
    kind: SentenceKind
    speaker: Optional[str]
    tokens: List[str]
    token_labels: List[TokenLabel]
    gold_label: int = 0
    start_ms: Optional[int] = None
    end_ms: Optional[int] = None

    @property
    def is_timed(self) -> bool:
        return self.start_ms is not None and self.end_ms is not None

    def validate(self) -> None:
        """
        Check the unit's invariants.

        Raises:
            CorpusError: An invariant does not hold
        """
        where = f"{self.episode_id}#{self.seq_index}"
        if self.seq_index < 0:
            raise CorpusError(f"{where}: negative seq_index")
        if len(self.token_labels) != len(self.tokens):
            raise CorpusError(
                f"{where}: {len(self.tokens)} tokens but {len(self.token_labels)} token labels")
        if self.gold_label != derive_sentence_label(self.token_labels):
            raise CorpusError(f"{where}: gold_label disagrees with token labels")
        if (self.speaker is not None) != (self.kind is SentenceKind.UTTERANCE):
            raise CorpusError(f"{where}: speaker must be set exactly for utterances")
        if (self.start_ms is None) != (self.end_ms is None):
            raise CorpusError(f"{where}: start_ms and end_ms must be set together")
        if self.is_timed and self.end_ms < self.start_ms:
            raise CorpusError(f"{where}: end_ms precedes start_ms")


@dataclass(frozen=True)
class CaptionCue:
    """A time-stamped subtitle block."""
    index: int
    start_ms: int
    end_ms: int
    text: str


@dataclass
class Case:
    """One crime storyline within an episode."""
    episode_id: str
    case_id: int
    crime_type: CrimeType = CrimeType.OTHER
    sentences: List[SentenceUnit] = field(default_factory=list)

    @property
    def key(self) -> str:
        return case_key(self.episode_id, self.case_id)

    def validate(self) -> None:
        for unit in self.sentences:
            if unit.case_id != self.case_id or unit.episode_id != self.episode_id:
                raise CorpusError(
                    f"case {self.key}: sentence {unit.seq_index} belongs to "
                    f"{case_key(unit.episode_id, unit.case_id)}")


@dataclass(frozen=True)
class StatsRow:
    """min / max / mean of one per-case quantity."""
    minimum: float
    maximum: float
    average: float


@dataclass
class StatsTable:
    """Per-case corpus statistics."""
    rows: Dict[str, StatsRow]
    crime_types: Dict[CrimeType, int]
    episodes_with_one_case: int
    episodes_with_two_cases: int
    total_cases: int

    def __str__(self) -> str:
        parts = [
            f"episodes with one case   {self.episodes_with_one_case}",
            f"episodes with two cases  {self.episodes_with_two_cases}",
            f"total number of cases    {self.total_cases}",
            "",
            f"{'per case':<28}{'min':>8}{'max':>8}{'avg':>10}",
        ]
        for name, row in self.rows.items():
            parts.append(
                f"{name.replace('_', ' '):<28}{row.minimum:>8g}{row.maximum:>8g}{row.average:>10.1f}")
        parts.append("")
        for crime, count in self.crime_types.items():
            parts.append(f"{crime.value:<28}{count:>8}")
        return "\n".join(parts)
