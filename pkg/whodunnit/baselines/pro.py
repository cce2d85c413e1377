"""
PRO: label every sentence that contains a pronoun as a perpetrator mention.
"""
import logging
from pathlib import Path
from typing import AbstractSet, FrozenSet, List, Sequence

from whodunnit.baselines.constants import DEFAULT_PRONOUNS, LEXICON_SIZE
from whodunnit.corpus.types import SentenceUnit
from whodunnit.errors import CorpusError


logger = logging.getLogger(__name__)

DEFAULT_LEXICON: FrozenSet[str] = frozenset(DEFAULT_PRONOUNS)


def pro_label(tokens: Sequence[str], lexicon: AbstractSet[str] = DEFAULT_LEXICON) -> int:
    """1 iff some token is in the lexicon (exact match on lowercase tokens)."""
    return int(any(token in lexicon for token in tokens))


def pro_predict(units: Sequence[SentenceUnit], lexicon: AbstractSet[str] = DEFAULT_LEXICON) -> List[int]:
    return [pro_label(unit.tokens, lexicon) for unit in units]


def load_lexicon(path: Path) -> FrozenSet[str]:
    """
    Read a pronoun lexicon, one token per line; blank lines are ignored.

    Raises:
        CorpusError: Unreadable or empty file
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CorpusError(f"cannot read pronoun lexicon {path}: {exc}") from exc
    lexicon = frozenset(line.strip().lower() for line in lines if line.strip())
    if not lexicon:
        raise CorpusError(f"pronoun lexicon {path} is empty")
    if len(lexicon) != LEXICON_SIZE:
        logger.warning("Pronoun lexicon %s has %d entries, not %d", path, len(lexicon), LEXICON_SIZE)
    return lexicon
