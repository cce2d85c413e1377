"""
Layer forward and backward passes.

Every forward function returns its output plus a cache; the matching
``*_backward`` function takes the upstream gradient and that cache.
Sentences of one case are processed together along the first axis.
"""
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from whodunnit.errors import ShapeError
from whodunnit.nn.config import Modalities


class ConvBankCache(NamedTuple):
    width: int
    windows: np.ndarray
    pre: np.ndarray
    valid: np.ndarray
    best: np.ndarray


class EncoderCache(NamedTuple):
    token_ids: np.ndarray
    mask: np.ndarray
    banks: List[ConvBankCache]


def encode_sentences(
    token_ids: np.ndarray,
    token_mask: np.ndarray,
    params: Dict[str, np.ndarray],
    widths: Sequence[int],
) -> Tuple[np.ndarray, EncoderCache]:
    """
    Convolutional sentence encoder.

    Embeds the tokens (pad positions contribute zero vectors), runs each
    filter bank over every window, applies ReLU and max-pools each channel
    over the valid windows. A window is valid when it covers at least one
    non-pad token; sentences shorter than a filter are padded internally.
    A sentence with no valid window encodes to zeros.

    Args:
        token_ids: (S, L) ids, or (L,) for one sentence
        token_mask: same shape, True at non-pad positions
        params: Tensor set holding ``embedding`` and ``conv{w}.*``
        widths: Filter widths

    Returns:
        (x_s of shape (S, len(widths) * channels), cache)
    """
    token_ids = np.atleast_2d(np.asarray(token_ids))
    mask = np.atleast_2d(np.asarray(token_mask)).astype(np.float64)
    if token_ids.shape != mask.shape:
        raise ShapeError(f"token ids {token_ids.shape} and mask {mask.shape} differ")
    embedding = params["embedding"]
    n_sentences, length = token_ids.shape
    dim = embedding.shape[1]
    embedded = embedding[token_ids] * mask[..., None]

    outputs = []
    banks = []
    for width in widths:
        weight = params[f"conv{width}.weight"]
        bias = params[f"conv{width}.bias"]
        if weight.shape[0] != width * dim:
            raise ShapeError(f"conv{width}.weight has {weight.shape[0]} rows, expected {width * dim}")
        padded_length = max(length, width)
        padded = np.zeros((n_sentences, padded_length, dim))
        padded[:, :length] = embedded
        padded_mask = np.zeros((n_sentences, padded_length))
        padded_mask[:, :length] = mask

        # (S, P, E, w) -> (S * P, w * E), row-major over (offset, embedding dim)
        windows = sliding_window_view(padded, width, axis=1).transpose(0, 1, 3, 2)
        n_windows = windows.shape[1]
        windows = np.ascontiguousarray(windows).reshape(-1, width * dim)
        valid = sliding_window_view(padded_mask, width, axis=1).max(axis=2) > 0
        pre = (windows @ weight).reshape(n_sentences, n_windows, -1) + bias
        act = np.maximum(pre, 0.0) * valid[..., None]
        best = act.argmax(axis=1)
        outputs.append(np.take_along_axis(act, best[:, None, :], axis=1)[:, 0, :])
        banks.append(ConvBankCache(width, windows, pre, valid, best))
    return np.concatenate(outputs, axis=1), EncoderCache(token_ids, mask, banks)


def encode_sentences_backward(
    d_x_s: np.ndarray,
    cache: EncoderCache,
    params: Dict[str, np.ndarray],
) -> Dict[str, np.ndarray]:
    """Gradients of the embedding table and every filter bank."""
    embedding = params["embedding"]
    n_sentences, length = cache.token_ids.shape
    dim = embedding.shape[1]
    rows = np.arange(n_sentences)[:, None]
    grads = {}
    d_embedded = np.zeros((n_sentences, length, dim))
    offset = 0
    for bank in cache.banks:
        weight = params[f"conv{bank.width}.weight"]
        channels = weight.shape[1]
        columns = np.arange(channels)[None, :]
        d_pooled = d_x_s[:, offset:offset + channels]
        offset += channels

        active = (bank.pre[rows, bank.best, columns] > 0) & bank.valid[rows, bank.best]
        d_pre = np.zeros_like(bank.pre)
        d_pre[rows, bank.best, columns] = d_pooled * active
        grads[f"conv{bank.width}.weight"] = (
            bank.windows.T @ d_pre.reshape(-1, channels))
        grads[f"conv{bank.width}.bias"] = d_pre.sum(axis=(0, 1))

        n_windows = bank.pre.shape[1]
        d_windows = (d_pre @ weight.T).reshape(n_sentences, n_windows, bank.width, dim)
        d_padded = np.zeros((n_sentences, n_windows + bank.width - 1, dim))
        for shift in range(bank.width):
            d_padded[:, shift:shift + n_windows] += d_windows[:, :, shift]
        d_embedded += d_padded[:, :length]

    d_embedded *= cache.mask[..., None]
    d_embedding = np.zeros_like(embedding)
    np.add.at(d_embedding, cache.token_ids.reshape(-1), d_embedded.reshape(-1, dim))
    grads["embedding"] = d_embedding
    return grads


class FusionCache(NamedTuple):
    x: np.ndarray
    pre: np.ndarray
    text_dim: int


def fusion_input(
    x_s: np.ndarray,
    x_v: Optional[np.ndarray],
    x_a: Optional[np.ndarray],
    modalities: Modalities,
) -> np.ndarray:
    """Concatenate the enabled modality vectors; disabled ones are left out."""
    parts = [np.atleast_2d(x_s)]
    if modalities.visual:
        if x_v is None:
            raise ShapeError("visual modality enabled but no visual vectors given")
        parts.append(np.atleast_2d(x_v))
    if modalities.acoustic:
        if x_a is None:
            raise ShapeError("acoustic modality enabled but no acoustic vectors given")
        parts.append(np.atleast_2d(x_a))
    return np.concatenate(parts, axis=1)


def fuse(
    x_s: np.ndarray,
    x_v: Optional[np.ndarray],
    x_a: Optional[np.ndarray],
    params: Dict[str, np.ndarray],
    modalities: Modalities,
) -> Tuple[np.ndarray, FusionCache]:
    """
    x_h = ReLU([x_s; x_v; x_a] W^h + b^h).

    Raises:
        ShapeError: Concatenated width differs from the rows of W^h
    """
    x = fusion_input(x_s, x_v, x_a, modalities)
    weight = params["fusion.weight"]
    if x.shape[1] != weight.shape[0]:
        raise ShapeError(f"fusion input has width {x.shape[1]}, fusion.weight expects {weight.shape[0]}")
    pre = x @ weight + params["fusion.bias"]
    return np.maximum(pre, 0.0), FusionCache(x, pre, np.atleast_2d(x_s).shape[1])


def fuse_backward(
    d_x_h: np.ndarray,
    cache: FusionCache,
    params: Dict[str, np.ndarray],
) -> Tuple[Dict[str, np.ndarray], np.ndarray]:
    """Returns (fusion gradients, gradient w.r.t. x_s)."""
    d_pre = d_x_h * (cache.pre > 0)
    grads = {
        "fusion.weight": cache.x.T @ d_pre,
        "fusion.bias": d_pre.sum(axis=0),
    }
    d_x = d_pre @ params["fusion.weight"].T
    return grads, d_x[:, :cache.text_dim]


@dataclass(frozen=True)
class LstmState:
    """Hidden state h and memory slot c."""
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden_dim: int) -> "LstmState":
        return cls(h=np.zeros(hidden_dim), c=np.zeros(hidden_dim))


class LstmStepCache(NamedTuple):
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray
    c_prev: np.ndarray
    tanh_c: np.ndarray


def lstm_step(
    x_h: np.ndarray,
    prev: LstmState,
    weight: np.ndarray,
    bias: np.ndarray,
) -> Tuple[LstmState, LstmStepCache]:
    """
    One LSTM step.

    The weight maps [h_{t-1}; x_t] to four stacked pre-activation blocks in
    the order input gate, forget gate, output gate, candidate.
    """
    hidden = prev.h.shape[0]
    if weight.shape != (hidden + x_h.shape[0], 4 * hidden):
        raise ShapeError(f"lstm.weight has shape {weight.shape}, expected {(hidden + x_h.shape[0], 4 * hidden)}")
    return lstm_recur(x_h @ weight[hidden:] + bias, prev, weight[:hidden])


def lstm_recur(
    x_proj: np.ndarray,
    prev: LstmState,
    recurrent: np.ndarray,
) -> Tuple[LstmState, LstmStepCache]:
    """
    LSTM step on an input already projected through the input rows of the
    weight (bias included); ``recurrent`` holds the first H rows.
    """
    hidden = prev.h.shape[0]
    z = prev.h @ recurrent + x_proj
    gates = expit(z[:3 * hidden])
    i = gates[:hidden]
    f = gates[hidden:2 * hidden]
    o = gates[2 * hidden:]
    g = np.tanh(z[3 * hidden:])
    c = f * prev.c + i * g
    tanh_c = np.tanh(c)
    return LstmState(h=o * tanh_c, c=c), LstmStepCache(i, f, o, g, prev.c, tanh_c)


def lstm_step_backward(
    d_h: np.ndarray,
    d_c: np.ndarray,
    cache: LstmStepCache,
    recurrent: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Backward through one step.

    The weight, bias and input gradients are all linear in d_z, so callers
    stack d_z over the sequence and form them with one product each.

    Returns:
        (d_z, d_h_prev, d_c_prev)
    """
    d_o = d_h * cache.tanh_c
    d_c = d_c + d_h * cache.o * (1.0 - cache.tanh_c ** 2)
    d_z = np.concatenate([
        d_c * cache.g * cache.i * (1.0 - cache.i),
        d_c * cache.c_prev * cache.f * (1.0 - cache.f),
        d_o * cache.o * (1.0 - cache.o),
        d_c * cache.i * (1.0 - cache.g ** 2),
    ])
    return d_z, recurrent @ d_z, d_c * cache.f


def dropout_mask(rng: np.random.Generator, shape: tuple, rate: float) -> np.ndarray:
    """Inverted dropout mask: kept units are scaled by 1 / (1 - rate)."""
    return (rng.random(shape) >= rate) / (1.0 - rate)
