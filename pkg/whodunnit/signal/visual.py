"""
Visual feature store: precomputed frame vectors keyed by millisecond timestamps.

File format: a header line ``dim=<D>`` followed by rows ``t_ms v1 .. vD``.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from whodunnit.errors import VisualStoreError
from whodunnit.signal.constants import VISUAL_DIM


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VisualStore:
    """Frame vectors sorted by timestamp."""
    times_ms: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @classmethod
    def from_mapping(cls, entries: Mapping[int, np.ndarray], dim: int = VISUAL_DIM) -> "VisualStore":
        """
        Build a store from {t_ms: vector}.

        Raises:
            VisualStoreError: Empty mapping or a vector of the wrong dimension
        """
        if not entries:
            raise VisualStoreError("visual store is empty")
        times = np.array(sorted(entries), dtype=np.int64)
        rows = []
        for t in times:
            vector = np.asarray(entries[int(t)], dtype=np.float64).reshape(-1)
            if vector.shape[0] != dim:
                raise VisualStoreError(f"vector at {t} ms has dimension {vector.shape[0]}, expected {dim}")
            rows.append(vector)
        return cls(times_ms=times, vectors=np.vstack(rows))


def visual_feature(store: VisualStore, t_ms: int) -> np.ndarray:
    """
    Return the vector whose timestamp is nearest t_ms; ties go to the earlier key.

    Raises:
        VisualStoreError: Empty store
    """
    if len(store.times_ms) == 0:
        raise VisualStoreError("visual store is empty")
    right = int(np.searchsorted(store.times_ms, t_ms, side="left"))
    if right == 0:
        return store.vectors[0]
    if right == len(store.times_ms):
        return store.vectors[-1]
    left = right - 1
    if t_ms - store.times_ms[left] <= store.times_ms[right] - t_ms:
        return store.vectors[left]
    return store.vectors[right]


def load_visual_store(path: Path, dim: int = VISUAL_DIM) -> VisualStore:
    """
    Read a visual store file.

    Raises:
        VisualStoreError: Missing or mismatched header, bad rows, wrong
            vector dimension, duplicate timestamps or no rows at all
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise VisualStoreError(f"cannot read visual store {path}: {exc}") from exc
    if not lines or not lines[0].startswith("dim="):
        raise VisualStoreError(f"{path}: missing 'dim=' header")
    try:
        header_dim = int(lines[0][4:])
    except ValueError as exc:
        raise VisualStoreError(f"{path}: bad header {lines[0]!r}") from exc
    if header_dim != dim:
        raise VisualStoreError(f"{path}: header dim {header_dim}, expected {dim}")

    entries = {}
    for line_number, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != dim + 1:
            logger.error("Visual store %s line %d has %d values", path, line_number, len(fields) - 1)
            raise VisualStoreError(
                f"{path} line {line_number}: vector has dimension {len(fields) - 1}, expected {dim}")
        try:
            t_ms = int(fields[0])
            vector = np.array(fields[1:], dtype=np.float64)
        except ValueError as exc:
            raise VisualStoreError(f"{path} line {line_number}: {exc}") from exc
        if t_ms in entries:
            raise VisualStoreError(f"{path} line {line_number}: duplicate timestamp {t_ms}")
        entries[t_ms] = vector
    store = VisualStore.from_mapping(entries, dim)
    logger.debug("Loaded %d visual vectors from %s", len(store.times_ms), path)
    return store


def write_visual_store(path: Path, store: VisualStore) -> None:
    """Write a store in the text format read by load_visual_store, eight significant digits per value."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        handle.write(f"dim={store.dim}\n")
        for t_ms, vector in zip(store.times_ms, store.vectors):
            handle.write(f"{int(t_ms)} " + " ".join(f"{v:.8g}" for v in vector) + "\n")
