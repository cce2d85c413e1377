"""
Per-sentence feature bundles and the binary feature cache.

Cache layout (little-endian): magic ``WDF1``; uint32 version; uint32
length and UTF-8 bytes of the episode id; uint32 record count,
max_tokens, visual dim and acoustic dim; then one fixed-size record per
sentence (case id, seq index, gold label, token ids, mask, x_v, x_a with
32-bit reals).
"""
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from whodunnit.corpus.types import SentenceUnit, case_key
from whodunnit.errors import FeatureCacheError, FeatureError
from whodunnit.signal.audio import AudioTrack
from whodunnit.signal.constants import CACHE_MAGIC, MAX_TOKENS
from whodunnit.signal.mfcc import MfccConfig, center_time, mfcc_frames, sentence_audio_feature
from whodunnit.signal.visual import VisualStore, visual_feature
from whodunnit.signal.vocab import Vocab


logger = logging.getLogger(__name__)

CACHE_VERSION = 1
_HEADER = struct.Struct("<4sI")
_COUNTS = struct.Struct("<IIII")
_LENGTH = struct.Struct("<I")


@dataclass
class FeatureBundle:
    """Model inputs for one sentence."""
    episode_id: str
    case_id: int
    seq_index: int
    token_ids: np.ndarray
    token_mask: np.ndarray
    x_v: np.ndarray
    x_a: np.ndarray
    gold_label: int

    @property
    def case_key(self) -> str:
        return case_key(self.episode_id, self.case_id)


def featurize_episode(
    units: Sequence[SentenceUnit],
    vocab: Vocab,
    track: AudioTrack,
    store: VisualStore,
    max_tokens: int = MAX_TOKENS,
    mfcc_config: MfccConfig = MfccConfig(),
) -> List[FeatureBundle]:
    """
    Build the bundles of every case sentence of one timed episode.

    Units outside any case are skipped. The MFCC frames are computed once
    for the whole track.

    Raises:
        FeatureError: A case sentence has no timestamps
        AudioError: A sentence interval lies outside the track
        VisualStoreError: The store is empty
    """
    frames = mfcc_frames(track, mfcc_config)
    bundles = []
    for unit in units:
        if unit.case_id is None:
            continue
        if not unit.is_timed:
            logger.error("Sentence %s#%d has no timestamps", unit.episode_id, unit.seq_index)
            raise FeatureError(f"{unit.episode_id}#{unit.seq_index}: sentence is not timed; run align first")
        ids, mask = vocab.encode(unit.tokens, max_tokens)
        bundles.append(FeatureBundle(
            episode_id=unit.episode_id,
            case_id=unit.case_id,
            seq_index=unit.seq_index,
            token_ids=ids,
            token_mask=mask,
            x_v=np.array(visual_feature(store, center_time(unit.start_ms, unit.end_ms)), dtype=np.float64),
            x_a=sentence_audio_feature(track, unit.start_ms, unit.end_ms, frames, mfcc_config),
            gold_label=unit.gold_label,
        ))
    logger.debug("Featurized %d sentences", len(bundles))
    return bundles


def _record_dtype(max_tokens: int, visual_dim: int, acoustic_dim: int) -> np.dtype:
    return np.dtype([
        ("case_id", "<i4"),
        ("seq_index", "<i4"),
        ("gold_label", "u1"),
        ("token_ids", "<i4", (max_tokens,)),
        ("token_mask", "u1", (max_tokens,)),
        ("x_v", "<f4", (visual_dim,)),
        ("x_a", "<f4", (acoustic_dim,)),
    ])


def write_feature_cache(path: Path, episode_id: str, bundles: Sequence[FeatureBundle]) -> None:
    """
    Write one episode's bundles to a WDF1 container.

    Raises:
        FeatureCacheError: Bundles disagree on dimensions or episode
    """
    path = Path(path)
    if bundles:
        max_tokens = len(bundles[0].token_ids)
        visual_dim = len(bundles[0].x_v)
        acoustic_dim = len(bundles[0].x_a)
    else:
        max_tokens = visual_dim = acoustic_dim = 0
    records = np.zeros(len(bundles), dtype=_record_dtype(max_tokens, visual_dim, acoustic_dim))
    for index, bundle in enumerate(bundles):
        if bundle.episode_id != episode_id:
            raise FeatureCacheError(f"bundle of episode {bundle.episode_id} in cache for {episode_id}")
        if (len(bundle.token_ids), len(bundle.x_v), len(bundle.x_a)) != (max_tokens, visual_dim, acoustic_dim):
            raise FeatureCacheError(f"{bundle.case_key}#{bundle.seq_index}: inconsistent bundle dimensions")
        records["case_id"][index] = bundle.case_id
        records["seq_index"][index] = bundle.seq_index
        records["gold_label"][index] = bundle.gold_label
        records["token_ids"][index] = bundle.token_ids
        records["token_mask"][index] = bundle.token_mask
        records["x_v"][index] = bundle.x_v
        records["x_a"][index] = bundle.x_a

    name = episode_id.encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as handle:
        handle.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION))
        handle.write(_LENGTH.pack(len(name)))
        handle.write(name)
        handle.write(_COUNTS.pack(len(bundles), max_tokens, visual_dim, acoustic_dim))
        handle.write(records.tobytes())
    logger.debug("Wrote %d bundles to %s", len(bundles), path)


def read_feature_cache(path: Path, max_tokens: Optional[int] = None) -> List[FeatureBundle]:
    """
    Read a WDF1 container; reals come back as 64-bit.

    Raises:
        FeatureCacheError: Bad magic, unknown version, truncated data or a
            max_tokens different from the requested one
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise FeatureCacheError(f"cannot read feature cache {path}: {exc}") from exc
    try:
        magic, version = _HEADER.unpack_from(data, 0)
        offset = _HEADER.size
        (name_length,) = _LENGTH.unpack_from(data, offset)
        offset += _LENGTH.size
        episode_id = data[offset:offset + name_length].decode("utf-8")
        offset += name_length
        count, cached_tokens, visual_dim, acoustic_dim = _COUNTS.unpack_from(data, offset)
        offset += _COUNTS.size
    except (struct.error, UnicodeDecodeError) as exc:
        raise FeatureCacheError(f"{path}: truncated header") from exc
    if magic != CACHE_MAGIC:
        raise FeatureCacheError(f"{path}: bad magic {magic!r}")
    if version != CACHE_VERSION:
        raise FeatureCacheError(f"{path}: unsupported cache version {version}")
    if max_tokens is not None and count and cached_tokens != max_tokens:
        raise FeatureCacheError(f"{path}: cached max_tokens {cached_tokens}, expected {max_tokens}")
    if count == 0:
        return []

    dtype = _record_dtype(cached_tokens, visual_dim, acoustic_dim)
    if len(data) - offset != count * dtype.itemsize:
        logger.error("Feature cache %s has %d payload bytes for %d records", path, len(data) - offset, count)
        raise FeatureCacheError(f"{path}: payload size does not match {count} records")
    records = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
    return [
        FeatureBundle(
            episode_id=episode_id,
            case_id=int(row["case_id"]),
            seq_index=int(row["seq_index"]),
            token_ids=row["token_ids"].astype(np.int64),
            token_mask=row["token_mask"].astype(bool),
            x_v=row["x_v"].astype(np.float64),
            x_a=row["x_a"].astype(np.float64),
            gold_label=int(row["gold_label"]),
        )
        for row in records
    ]


def group_by_case(bundles: Sequence[FeatureBundle]) -> List[List[FeatureBundle]]:
    """Split bundles into per-case sequences in seq_index order, cases sorted by key."""
    cases = {}
    for bundle in bundles:
        cases.setdefault((bundle.episode_id, bundle.case_id), []).append(bundle)
    return [sorted(cases[key], key=lambda b: b.seq_index) for key in sorted(cases)]
