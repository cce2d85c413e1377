"""
WDNN checkpoint container.

Layout (little-endian): magic ``WDNN``; uint32 format version; uint32
length and UTF-8 JSON of the configuration echo; uint32 tensor count;
per tensor: uint32 name length, name, uint32 rank, uint32 dims, then
row-major float64 values.
"""
import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple

import numpy as np

from whodunnit.errors import CheckpointError
from whodunnit.nn.constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from whodunnit.nn.params import TensorSet


logger = logging.getLogger(__name__)

_UINT = struct.Struct("<I")


def _pack_text(text: str) -> bytes:
    data = text.encode("utf-8")
    return _UINT.pack(len(data)) + data


def checkpoint_bytes(params: Mapping[str, np.ndarray], echo: Mapping[str, Any]) -> bytes:
    """Serialize tensors and config echo; identical inputs give identical bytes."""
    chunks = [CHECKPOINT_MAGIC, _UINT.pack(CHECKPOINT_VERSION)]
    chunks.append(_pack_text(json.dumps(echo, sort_keys=True)))
    chunks.append(_UINT.pack(len(params)))
    for name, value in params.items():
        value = np.ascontiguousarray(value, dtype="<f8")
        chunks.append(_pack_text(name))
        chunks.append(_UINT.pack(value.ndim))
        chunks.extend(_UINT.pack(dim) for dim in value.shape)
        chunks.append(value.tobytes())
    return b"".join(chunks)


def save_checkpoint(path: Path, params: Mapping[str, np.ndarray], echo: Mapping[str, Any]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(checkpoint_bytes(params, echo))
    logger.info("Saved checkpoint %s (%d tensors)", path, len(params))


class _Reader:
    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.offset = 0
        self.path = path

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise CheckpointError(f"{self.path}: truncated checkpoint")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def uint(self) -> int:
        return _UINT.unpack(self.take(_UINT.size))[0]

    def text(self) -> str:
        try:
            return self.take(self.uint()).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CheckpointError(f"{self.path}: bad string in checkpoint") from exc


def load_checkpoint(path: Path) -> Tuple[TensorSet, Dict[str, Any]]:
    """
    Read a checkpoint.

    Returns:
        (tensors in stored order, configuration echo)

    Raises:
        CheckpointError: Unreadable file, bad magic, unknown version,
            truncation or trailing bytes
    """
    path = Path(path)
    try:
        reader = _Reader(path.read_bytes(), path)
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    magic = reader.take(len(CHECKPOINT_MAGIC))
    if magic != CHECKPOINT_MAGIC:
        logger.error("Checkpoint %s has magic %r", path, magic)
        raise CheckpointError(f"{path}: not a WDNN checkpoint")
    version = reader.uint()
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    try:
        echo = json.loads(reader.text())
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: bad configuration echo") from exc

    params: TensorSet = {}
    for _ in range(reader.uint()):
        name = reader.text()
        shape = tuple(reader.uint() for _ in range(reader.uint()))
        count = int(np.prod(shape, dtype=np.int64))
        values = np.frombuffer(reader.take(8 * count), dtype="<f8")
        params[name] = values.astype(np.float64).reshape(shape)
    if reader.offset != len(reader.data):
        raise CheckpointError(f"{path}: trailing bytes after last tensor")
    logger.debug("Loaded checkpoint %s (%d tensors)", path, len(params))
    return params, echo
