"""
SubRip (SRT) caption parser.
"""
import logging
import re
from datetime import timedelta
from typing import List

import srt

from whodunnit.corpus.constants import SRT_BLOCK_SEPARATOR, SRT_TAGS
from whodunnit.corpus.types import CaptionCue
from whodunnit.errors import SrtParseError


logger = logging.getLogger(__name__)

_MILLISECOND = timedelta(milliseconds=1)


def _to_ms(delta: timedelta) -> int:
    return delta // _MILLISECOND


def _parse_block(block: str, ordinal: int) -> srt.Subtitle:
    try:
        subtitles = list(srt.parse(block))
    except srt.SRTParseError as exc:
        logger.error("Malformed SRT block %d: %s", ordinal, block.splitlines()[0])
        raise SrtParseError(f"malformed block {block.splitlines()[:2]!r}", ordinal) from exc
    if len(subtitles) != 1:
        raise SrtParseError(f"expected one cue, found {len(subtitles)}", ordinal)
    return subtitles[0]


def parse_srt(text: str) -> List[CaptionCue]:
    """
    Parse a SubRip stream into caption cues.

    Blocks are separated by blank lines and each must hold exactly one
    cue. Multi-line cue text is joined with single spaces and formatting
    tags are removed.

    Args:
        text: Decoded SRT content

    Returns:
        Cues in file order

    Raises:
        SrtParseError: A block has a bad index or timestamp, a cue ends
            before it starts, or indices/start times go backwards
    """
    text = text.lstrip("\ufeff")
    blocks = [block for block in SRT_BLOCK_SEPARATOR.split(text) if block.strip()]
    cues: List[CaptionCue] = []

    for ordinal, block in enumerate(blocks, 1):
        subtitle = _parse_block(block, ordinal)
        if subtitle.index is None or subtitle.index < 1:
            raise SrtParseError(f"expected a positive cue index, got {subtitle.index!r}", ordinal)
        index = subtitle.index
        start_ms, end_ms = _to_ms(subtitle.start), _to_ms(subtitle.end)

        if end_ms <= start_ms:
            raise SrtParseError(f"cue ends ({end_ms} ms) before it starts ({start_ms} ms)", index)
        if cues and index <= cues[-1].index:
            raise SrtParseError(f"index {index} does not increase after {cues[-1].index}", index)
        if cues and start_ms < cues[-1].start_ms:
            raise SrtParseError("cue starts before the previous cue", index)

        content = " ".join(SRT_TAGS.sub("", line).strip() for line in subtitle.content.splitlines())
        cues.append(CaptionCue(index=index, start_ms=start_ms, end_ms=end_ms,
                               text=re.sub(r"\s+", " ", content).strip()))

    logger.debug("Parsed %d caption cues", len(cues))
    return cues


def format_srt(cues: List[CaptionCue]) -> str:
    """Render cues back to SubRip text."""
    subtitles = [
        srt.Subtitle(index=cue.index, start=cue.start_ms * _MILLISECOND, end=cue.end_ms * _MILLISECOND,
                     content=cue.text)
        for cue in cues
    ]
    return srt.compose(subtitles, reindex=False)
