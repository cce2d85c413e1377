"""
Timestamp allocation for screenplay elements that captions do not cover.
"""
import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

from whodunnit.align.dtw import Alignment
from whodunnit.corpus.types import CaptionCue, SentenceKind, SentenceUnit
from whodunnit.errors import AlignmentError


logger = logging.getLogger(__name__)


@dataclass
class EpisodeTimeline:
    """An episode's units, every one of them carrying a time span."""
    episode_id: str
    units: List[SentenceUnit]


def utterance_positions(units: Sequence[SentenceUnit]) -> List[int]:
    """Positions (into units) of the utterances, in order."""
    return [pos for pos, unit in enumerate(units) if unit.kind is SentenceKind.UTTERANCE]


def utterance_tokens(units: Sequence[SentenceUnit]) -> List[List[str]]:
    """Token lists of the utterances, the DTW input on the screenplay side."""
    return [list(units[pos].tokens) for pos in utterance_positions(units)]


def split_gap(start_ms: int, end_ms: int, weights: Sequence[int]) -> List[Tuple[int, int]]:
    """
    Tile [start_ms, end_ms] with consecutive spans proportional to weights.

    Boundaries are floored so the spans are disjoint, ordered, and their
    union is exactly the gap.
    """
    total = sum(weights)
    gap = end_ms - start_ms
    spans = []
    cumulative = 0
    left = start_ms
    for weight in weights:
        cumulative += weight
        right = start_ms + (gap * cumulative) // total
        spans.append((left, right))
        left = right
    return spans


def allocate_timestamps(
    units: Sequence[SentenceUnit],
    alignment: Alignment,
    cues: Sequence[CaptionCue],
    episode_start_ms: int,
    episode_end_ms: int,
) -> EpisodeTimeline:
    """
    Give every unit of an episode a time span.

    Matched utterances copy their cue's span. Every run of untimed units
    (unmatched utterances and scene descriptions) fills the gap between its
    timed neighbours, split in proportion to token counts (empty sentences
    count as one token). Runs before the first or after the last timed
    utterance use the episode start or end as the missing neighbour.

    Args:
        units: The episode's units in seq_index order
        alignment: dtw_align result over utterance_tokens(units)
        cues: The caption cues the alignment refers to
        episode_start_ms: Start of the episode timeline
        episode_end_ms: End of the episode timeline

    Returns:
        EpisodeTimeline with start_ms/end_ms set on copies of the units

    Raises:
        AlignmentError: No utterance was matched, or the alignment refers
            to utterances or cues that do not exist
    """
    if not alignment.pairs:
        logger.error("No matched utterances; cannot anchor the episode timeline")
        raise AlignmentError("episode has zero matched utterances")

    positions = utterance_positions(units)
    spans: List[Optional[Tuple[int, int]]] = [None] * len(units)
    for utterance_index, cue_index in alignment.pairs:
        if utterance_index >= len(positions) or cue_index >= len(cues):
            raise AlignmentError(f"alignment pair ({utterance_index}, {cue_index}) is out of range")
        cue = cues[cue_index]
        spans[positions[utterance_index]] = (cue.start_ms, cue.end_ms)

    pos = 0
    previous_end = episode_start_ms
    while pos < len(units):
        if spans[pos] is not None:
            previous_end = spans[pos][1]
            pos += 1
            continue
        run_end = pos
        while run_end < len(units) and spans[run_end] is None:
            run_end += 1
        if run_end < len(units):
            gap_end = spans[run_end][0]
        else:
            gap_end = episode_end_ms
        gap_end = max(gap_end, previous_end)
        weights = [max(len(units[k].tokens), 1) for k in range(pos, run_end)]
        for k, span in zip(range(pos, run_end), split_gap(previous_end, gap_end, weights)):
            spans[k] = span
        pos = run_end

    timed = [replace(unit, start_ms=span[0], end_ms=span[1]) for unit, span in zip(units, spans)]
    episode_id = units[0].episode_id if units else ""
    logger.debug("Allocated timestamps for %d units of %s (%d anchored)",
                 len(timed), episode_id, len(alignment.pairs))
    return EpisodeTimeline(episode_id=episode_id, units=timed)
