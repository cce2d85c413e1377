"""
Screenplay parser - turn line-oriented screenplay text into SentenceUnits.

Grammar (one element per line, UTF-8):

    ## <scene heading>          starts a scene
    NAME: <dialog>              utterance cue; an empty dialog continues on the next line
    <dialog>                    continues the most recent speaker's dialog
    (<description>)             scene description, may span several lines
"""
import logging
from typing import List, Optional

from whodunnit.corpus.constants import (
    SCENE_HEADING,
    SENTENCE_BOUNDARY,
    SPEAKER_CUE,
    TOKEN_STRIP_CHARS,
)
from whodunnit.corpus.types import SentenceKind, SentenceUnit, TokenLabel
from whodunnit.errors import ScreenplayParseError


logger = logging.getLogger(__name__)


def tokenize(text: str) -> List[str]:
    """
    Lowercase, split on whitespace and strip surrounding punctuation.

    Internal apostrophes are kept, so "don't" stays one token. Tokens
    that consist only of punctuation are dropped.
    """
    tokens = []
    for raw in text.lower().split():
        token = raw.strip(TOKEN_STRIP_CHARS)
        if token:
            tokens.append(token)
    return tokens


def split_sentences(text: str) -> List[str]:
    """Split one screenplay line into sentences at [.?!] followed by whitespace."""
    return [piece.strip() for piece in SENTENCE_BOUNDARY.split(text.strip()) if piece.strip()]


class _ScreenplayBuilder:
    """Accumulates units while the parser walks the lines."""

    def __init__(self, episode_id: str):
        self.episode_id = episode_id
        self.units: List[SentenceUnit] = []

    def emit(self, kind: SentenceKind, speaker: Optional[str], text: str) -> None:
        # an empty element still occupies one position
        for sentence in split_sentences(text) or [""]:
            tokens = tokenize(sentence)
            self.units.append(SentenceUnit(
                episode_id=self.episode_id,
                case_id=None,
                seq_index=len(self.units),
                kind=kind,
                speaker=speaker,
                tokens=tokens,
                token_labels=[TokenLabel.NONE] * len(tokens),
                gold_label=0,
            ))


def parse_screenplay(text: str, episode_id: str) -> List[SentenceUnit]:
    """
    Parse screenplay text into an ordered list of SentenceUnits.

    Units come back unannotated: case_id is None, every token label is
    None and gold_label is 0. Annotations arrive through the interchange
    format.

    Args:
        text: Screenplay text
        episode_id: Identifier stored on every unit

    Returns:
        Units in screenplay order with seq_index 0, 1, 2, ...

    Raises:
        ScreenplayParseError: A cue has no dialog, dialog has no cue, or a
            scene description is never closed
    """
    builder = _ScreenplayBuilder(episode_id)
    speaker: Optional[str] = None
    open_cue_line: Optional[int] = None
    description: Optional[List[str]] = None
    description_line = 0

    def close_cue(line_number: int) -> None:
        if open_cue_line is not None:
            logger.error("Cue on line %d of %s has no dialog", open_cue_line, episode_id)
            raise ScreenplayParseError(
                f"speaker cue {speaker!r} is not followed by dialog (next element on line {line_number})",
                open_cue_line,
            )

    for line_number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()

        if description is not None:
            if line:
                description.append(line)
            if line.endswith(")"):
                joined = " ".join(description)
                builder.emit(SentenceKind.SCENE_DESCRIPTION, None, joined[1:-1])
                description = None
            continue

        if not line:
            continue

        if SCENE_HEADING.match(line):
            close_cue(line_number)
            speaker = None
            logger.debug("Scene heading on line %d: %s", line_number, line)
            continue

        if line.startswith("("):
            close_cue(line_number)
            if line.endswith(")"):
                builder.emit(SentenceKind.SCENE_DESCRIPTION, None, line[1:-1])
            else:
                description = [line]
                description_line = line_number
            continue

        cue = SPEAKER_CUE.match(line)
        if cue:
            close_cue(line_number)
            speaker = cue.group("speaker").strip()
            dialog = cue.group("dialog").strip()
            if dialog:
                builder.emit(SentenceKind.UTTERANCE, speaker, dialog)
            else:
                open_cue_line = line_number
            continue

        if speaker is None:
            logger.error("Dialog without speaker on line %d of %s", line_number, episode_id)
            raise ScreenplayParseError("dialog line without a preceding speaker cue", line_number)
        builder.emit(SentenceKind.UTTERANCE, speaker, line)
        open_cue_line = None

    if description is not None:
        raise ScreenplayParseError("scene description is never closed", description_line)
    close_cue(len(text.splitlines()) + 1)

    logger.debug("Parsed %d sentences from %s", len(builder.units), episode_id)
    return builder.units
