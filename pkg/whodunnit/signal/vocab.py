"""
Vocabulary and pre-trained embedding initialization.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from whodunnit.errors import EmbeddingError
from whodunnit.signal.constants import (
    EMBEDDING_DIM,
    MAX_TOKENS,
    PAD_ID,
    PAD_TOKEN,
    UNK_ID,
    UNK_TOKEN,
)


logger = logging.getLogger(__name__)

UNK_INIT_SCALE = 0.1


@dataclass(frozen=True)
class Vocab:
    """Token to id map; id 0 is padding and id 1 is shared by all unknown tokens."""
    tokens: Tuple[str, ...]
    embedding_dim: int = EMBEDDING_DIM

    @cached_property
    def token_to_id(self) -> Dict[str, int]:
        return {token: index for index, token in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def encode(self, tokens: Sequence[str], max_tokens: int = MAX_TOKENS) -> Tuple[np.ndarray, np.ndarray]:
        """
        Map tokens to padded ids, truncating past max_tokens.

        Returns:
            (ids, mask) where mask is True exactly at non-pad positions
        """
        lookup = self.token_to_id
        ids = np.full(max_tokens, PAD_ID, dtype=np.int64)
        mask = np.zeros(max_tokens, dtype=bool)
        for position, token in enumerate(tokens[:max_tokens]):
            ids[position] = lookup.get(token, UNK_ID)
            mask[position] = True
        return ids, mask

    def write(self, path: Path) -> None:
        """One token per line; the line number is the id."""
        Path(path).write_text("".join(token + "\n" for token in self.tokens), encoding="utf-8")

    @classmethod
    def read(cls, path: Path, embedding_dim: int = EMBEDDING_DIM) -> "Vocab":
        tokens = tuple(Path(path).read_text(encoding="utf-8").splitlines())
        if tokens[:2] != (PAD_TOKEN, UNK_TOKEN):
            raise EmbeddingError(f"{path}: vocabulary must start with {PAD_TOKEN} and {UNK_TOKEN}")
        return cls(tokens=tokens, embedding_dim=embedding_dim)


def load_embeddings(path: Path, wanted: Iterable[str], dim: int = EMBEDDING_DIM) -> Dict[str, np.ndarray]:
    """
    Stream an embedding file, keeping only the rows for wanted tokens.

    Rows are ``token v1 .. v<dim>``; the first occurrence of a token wins.

    Raises:
        EmbeddingError: A row does not have exactly dim values
    """
    wanted = set(wanted)
    vectors: Dict[str, np.ndarray] = {}
    try:
        with Path(path).open(encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, 1):
                fields = line.rstrip("\n").split(" ")
                if len(fields) <= 1:
                    continue
                if len(fields) != dim + 1:
                    logger.error("Embedding row %d of %s has %d values", line_number, path, len(fields) - 1)
                    raise EmbeddingError(
                        f"{path} line {line_number}: expected {dim} values, got {len(fields) - 1}")
                token = fields[0]
                if token in wanted and token not in vectors:
                    vectors[token] = np.array(fields[1:], dtype=np.float64)
    except OSError as exc:
        raise EmbeddingError(f"cannot read embedding file {path}: {exc}") from exc
    except ValueError as exc:
        raise EmbeddingError(f"{path}: non-numeric embedding value: {exc}") from exc
    return vectors


def build_vocab(
    corpus_tokens: Iterable[Sequence[str]],
    embedding_file: Path,
    seed: int = 0,
    dim: int = EMBEDDING_DIM,
) -> Tuple[Vocab, np.ndarray]:
    """
    Build the vocabulary and its initial embedding table.

    Corpus tokens found in the embedding file get ids 2.. in sorted order
    and their file vectors. Every other token maps to the unknown id, whose
    vector is drawn once from a zero-mean normal distribution. The pad row
    is zero.

    Args:
        corpus_tokens: Token lists of every sentence in the corpus
        embedding_file: Text embedding file
        seed: Seed for the unknown-token vector
        dim: Embedding dimensionality

    Returns:
        (vocab, embedding table of shape (len(vocab), dim))

    Raises:
        EmbeddingError: Wrong dimensionality in the embedding file
    """
    distinct = set()
    for tokens in corpus_tokens:
        distinct.update(tokens)
    vectors = load_embeddings(embedding_file, distinct, dim)

    known: List[str] = sorted(vectors)
    vocab = Vocab(tokens=(PAD_TOKEN, UNK_TOKEN, *known), embedding_dim=dim)
    table = np.zeros((len(vocab), dim), dtype=np.float64)
    rng = np.random.default_rng(seed)
    table[UNK_ID] = rng.normal(0.0, UNK_INIT_SCALE, size=dim)
    for index, token in enumerate(known, 2):
        table[index] = vectors[token]

    logger.info("Vocabulary: %d of %d corpus tokens found in %s",
                len(known), len(distinct), embedding_file)
    return vocab, table
