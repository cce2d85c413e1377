"""
Named parameter tensors.

A TensorSet is an insertion-ordered mapping from tensor name to a
float64 array; gradients and ADAM moments use the same names.
"""
from typing import Dict, Mapping

import numpy as np

from whodunnit.errors import ShapeError
from whodunnit.nn.config import ModelConfig


TensorSet = Dict[str, np.ndarray]


def zeros_like(params: Mapping[str, np.ndarray]) -> TensorSet:
    return {name: np.zeros_like(value) for name, value in params.items()}


def copy_tensors(params: Mapping[str, np.ndarray]) -> TensorSet:
    return {name: np.array(value, dtype=np.float64, copy=True) for name, value in params.items()}


def accumulate(total: TensorSet, grads: Mapping[str, np.ndarray]) -> None:
    """Add grads into total in place."""
    for name, value in grads.items():
        total[name] += value


def all_finite(params: Mapping[str, np.ndarray]) -> bool:
    return all(np.all(np.isfinite(value)) for value in params.values())


def check_shapes(params: Mapping[str, np.ndarray], expected: Mapping[str, tuple]) -> None:
    """
    Raises:
        ShapeError: A tensor is missing, unexpected or mis-shaped
    """
    if set(params) != set(expected):
        missing = sorted(set(expected) - set(params))
        unknown = sorted(set(params) - set(expected))
        raise ShapeError(f"tensor names differ: missing={missing} unknown={unknown}")
    for name, shape in expected.items():
        if tuple(params[name].shape) != tuple(shape):
            raise ShapeError(f"{name}: shape {tuple(params[name].shape)}, expected {tuple(shape)}")


def uniform(rng: np.random.Generator, shape: tuple, scale: float) -> np.ndarray:
    return rng.uniform(-scale, scale, size=shape)


def front_end_shapes(config: ModelConfig) -> Dict[str, tuple]:
    """Shapes of the embedding, convolution and fusion tensors."""
    shapes = {"embedding": (config.vocab_size, config.embedding_dim)}
    for width in config.conv_widths:
        shapes[f"conv{width}.weight"] = (width * config.embedding_dim, config.conv_channels)
        shapes[f"conv{width}.bias"] = (config.conv_channels,)
    shapes["fusion.weight"] = (config.fusion_input_dim, config.fusion_dim)
    shapes["fusion.bias"] = (config.fusion_dim,)
    return shapes


def init_front_end(config: ModelConfig, embeddings: np.ndarray, rng: np.random.Generator) -> TensorSet:
    """
    Initialize the shared front-end.

    Weights are uniform in (-init_scale, init_scale), biases zero; the
    embedding table starts from the given pre-trained table.
    """
    embeddings = np.asarray(embeddings, dtype=np.float64)
    if embeddings.shape != (config.vocab_size, config.embedding_dim):
        raise ShapeError(
            f"embedding table has shape {embeddings.shape}, expected "
            f"{(config.vocab_size, config.embedding_dim)}")
    params: TensorSet = {"embedding": embeddings.copy()}
    for width in config.conv_widths:
        params[f"conv{width}.weight"] = uniform(
            rng, (width * config.embedding_dim, config.conv_channels), config.init_scale)
        params[f"conv{width}.bias"] = np.zeros(config.conv_channels)
    params["fusion.weight"] = uniform(rng, (config.fusion_input_dim, config.fusion_dim), config.init_scale)
    params["fusion.bias"] = np.zeros(config.fusion_dim)
    return params
