"""
Align - match screenplay dialog to captions and time-stamp the rest.
"""
from whodunnit.align.dtw import (
    DEFAULT_SKIP_PENALTY,
    Alignment,
    cue_cost,
    dtw_align,
    write_alignment_report,
)
from whodunnit.align.timestamps import (
    EpisodeTimeline,
    allocate_timestamps,
    split_gap,
    utterance_tokens,
)


__all__ = [
    "DEFAULT_SKIP_PENALTY",
    "Alignment",
    "EpisodeTimeline",
    "allocate_timestamps",
    "cue_cost",
    "dtw_align",
    "split_gap",
    "utterance_tokens",
    "write_alignment_report",
]
