"""
Dynamic time warping between screenplay dialog and caption cues.
"""
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from whodunnit.errors import AlignmentError


logger = logging.getLogger(__name__)

DEFAULT_SKIP_PENALTY = 0.5


@dataclass
class Alignment:
    """A monotone matching of utterances to caption cues."""
    pairs: List[Tuple[int, int]] = field(default_factory=list)
    pair_costs: List[float] = field(default_factory=list)
    skipped_utterances: List[int] = field(default_factory=list)
    skipped_cues: List[int] = field(default_factory=list)
    total_cost: float = 0.0


def cue_cost(sentence_tokens: Sequence[str], cue_tokens: Sequence[str]) -> float:
    """
    Local match cost: one minus the Jaccard similarity of the token sets.

    Two empty token sets cost 0.
    """
    a, b = set(sentence_tokens), set(cue_tokens)
    union = a | b
    if not union:
        return 0.0
    return 1.0 - len(a & b) / len(union)


def dtw_align(
    utterances: Sequence[Sequence[str]],
    cues: Sequence[Sequence[str]],
    skip_penalty: float = DEFAULT_SKIP_PENALTY,
) -> Alignment:
    """
    Minimum-cost monotone alignment of utterances to cues.

    Moves are match(i, j) costing cue_cost, skip-utterance and skip-cue
    each costing skip_penalty. The table holds suffix costs and is read
    forward from (0, 0), so among equal-cost paths the one whose earliest
    decision prefers match, then skip-utterance, then skip-cue wins.

    Args:
        utterances: Token lists of the screenplay utterances
        cues: Token lists of the caption cues
        skip_penalty: Cost of leaving one element unmatched

    Returns:
        Alignment with pairs ordered by both coordinates

    Raises:
        AlignmentError: Either sequence is empty or the penalty is negative
    """
    if not utterances or not cues:
        raise AlignmentError("dtw_align needs non-empty utterance and cue sequences")
    if skip_penalty < 0:
        raise AlignmentError(f"skip_penalty must be nonnegative, got {skip_penalty}")

    n, m = len(utterances), len(cues)
    local = np.array([[cue_cost(u, c) for c in cues] for u in utterances], dtype=np.float64)

    # suffix[i, j] = cheapest way to align utterances[i:] with cues[j:]
    suffix = np.zeros((n + 1, m + 1), dtype=np.float64)
    suffix[n, :] = (m - np.arange(m + 1)) * skip_penalty
    suffix[:, m] = (n - np.arange(n + 1)) * skip_penalty
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            suffix[i, j] = min(
                local[i, j] + suffix[i + 1, j + 1],
                skip_penalty + suffix[i + 1, j],
                skip_penalty + suffix[i, j + 1],
            )

    alignment = Alignment()
    i = j = 0
    while i < n or j < m:
        if i < n and j < m:
            options = (
                local[i, j] + suffix[i + 1, j + 1],
                skip_penalty + suffix[i + 1, j],
                skip_penalty + suffix[i, j + 1],
            )
            move = int(np.argmin(options))
        else:
            move = 1 if i < n else 2

        if move == 0:
            alignment.pairs.append((i, j))
            alignment.pair_costs.append(float(local[i, j]))
            i += 1
            j += 1
        elif move == 1:
            alignment.skipped_utterances.append(i)
            i += 1
        else:
            alignment.skipped_cues.append(j)
            j += 1
    alignment.total_cost = float(suffix[0, 0])

    logger.debug("Aligned %d utterances to %d cues: %d pairs, cost %.4f",
                 n, m, len(alignment.pairs), alignment.total_cost)
    return alignment


def write_alignment_report(path: Path, alignment: Alignment) -> None:
    """Write the alignment as CSV rows ``utterance_index,cue_index,cost``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["utterance_index", "cue_index", "cost"])
        for (u, c), cost in zip(alignment.pairs, alignment.pair_costs):
            writer.writerow([u, c, f"{cost:.6f}"])
    logger.info("Wrote alignment report %s", path)
