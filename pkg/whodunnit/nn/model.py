"""
Taggers: the incremental LSTM model and the interface shared with the baselines.
"""
import logging
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.special import log_softmax, softmax

from whodunnit.errors import ModelError, NonFiniteLossError, ShapeError
from whodunnit.nn import constants
from whodunnit.nn.config import ModelConfig, model_config_to_dict
from whodunnit.nn.layers import (
    EncoderCache,
    FusionCache,
    LstmState,
    dropout_mask,
    encode_sentences,
    encode_sentences_backward,
    fuse,
    fuse_backward,
    lstm_recur,
    lstm_step_backward,
)
from whodunnit.nn.params import (
    TensorSet,
    accumulate,
    check_shapes,
    front_end_shapes,
    init_front_end,
    uniform,
    zeros_like,
)
from whodunnit.signal.bundle import FeatureBundle


logger = logging.getLogger(__name__)

CaseBundles = Sequence[FeatureBundle]


def gold_labels(case: CaseBundles) -> np.ndarray:
    return np.array([bundle.gold_label for bundle in case], dtype=np.int64)


def decide(probabilities: np.ndarray) -> np.ndarray:
    """Binary decision at p >= 0.5."""
    return (np.asarray(probabilities) >= 0.5).astype(np.int64)


class Tagger:
    """
    A trainable per-case sentence tagger.

    Subclasses own their parameter layout; the training loop only sees
    named tensors, a loss with gradients and per-case predictions.
    """
    name = "tagger"

    def init_params(self, rng: np.random.Generator) -> TensorSet:
        raise NotImplementedError

    def param_shapes(self) -> Dict[str, tuple]:
        raise NotImplementedError

    def loss_and_grads(
        self,
        params: TensorSet,
        cases: Sequence[CaseBundles],
        rng: Optional[np.random.Generator] = None,
    ) -> Tuple[float, TensorSet]:
        """Mean per-sentence loss over the batch and its gradients; rng enables dropout."""
        raise NotImplementedError

    def predict_case(self, params: TensorSet, case: CaseBundles) -> Tuple[np.ndarray, np.ndarray]:
        """Deterministic (probability of label 1, predicted label) per sentence."""
        raise NotImplementedError

    def config_echo(self) -> Dict[str, Any]:
        raise NotImplementedError

    def check_params(self, params: TensorSet) -> None:
        check_shapes(params, self.param_shapes())


class FrontEndCache(NamedTuple):
    encoder: EncoderCache
    fusion: FusionCache


class FrontEndTagger(Tagger):
    """Tagger whose sentence vectors come from the convolutional encoder plus fusion."""

    def __init__(self, config: ModelConfig, embeddings: Optional[np.ndarray] = None, dropout: float = constants.DROPOUT):
        if not 0.0 <= dropout < 1.0:
            raise ModelError(f"dropout must lie in [0, 1), got {dropout}")
        self.config = config
        self.embeddings = embeddings
        self.dropout = dropout

    def _init_front_end(self, rng: np.random.Generator) -> TensorSet:
        if self.embeddings is None:
            raise ModelError("initial embedding table required to initialize parameters")
        return init_front_end(self.config, self.embeddings, rng)

    def front_forward(self, params: TensorSet, case: CaseBundles) -> Tuple[np.ndarray, FrontEndCache]:
        token_ids = np.stack([bundle.token_ids for bundle in case])
        token_mask = np.stack([bundle.token_mask for bundle in case])
        x_s, encoder = encode_sentences(token_ids, token_mask, params, self.config.conv_widths)
        modalities = self.config.modalities
        x_v = np.stack([bundle.x_v for bundle in case]) if modalities.visual else None
        x_a = np.stack([bundle.x_a for bundle in case]) if modalities.acoustic else None
        x_h, fusion = fuse(x_s, x_v, x_a, params, modalities)
        return x_h, FrontEndCache(encoder, fusion)

    def front_backward(self, params: TensorSet, d_x_h: np.ndarray, cache: FrontEndCache) -> TensorSet:
        grads, d_x_s = fuse_backward(d_x_h, cache.fusion, params)
        grads.update(encode_sentences_backward(d_x_s, cache.encoder, params))
        return grads

    def _dropout_masks(self, rng: Optional[np.random.Generator], shapes: Sequence[tuple]) -> List[Optional[np.ndarray]]:
        if rng is None or self.dropout == 0.0:
            return [None] * len(shapes)
        return [dropout_mask(rng, shape, self.dropout) for shape in shapes]

    def case_logits(self, params: TensorSet, case: CaseBundles, rng: Optional[np.random.Generator] = None):
        raise NotImplementedError

    def case_backward(self, params: TensorSet, d_logits: np.ndarray, cache) -> TensorSet:
        raise NotImplementedError

    def loss_and_grads(self, params, cases, rng=None):
        n_sentences = sum(len(case) for case in cases)
        if n_sentences == 0:
            raise ModelError("loss requested for a batch without sentences")
        total = 0.0
        grads = zeros_like(params)
        for case in cases:
            if not case:
                continue
            logits, cache = self.case_logits(params, case, rng)
            gold = gold_labels(case)
            rows = np.arange(len(case))
            case_loss = -float(log_softmax(logits, axis=1)[rows, gold].sum())
            if not np.isfinite(case_loss):
                logger.error("Non-finite loss on case %s", case[0].case_key)
                raise NonFiniteLossError("non-finite loss", case[0].case_key)
            total += case_loss
            d_logits = softmax(logits, axis=1)
            d_logits[rows, gold] -= 1.0
            accumulate(grads, self.case_backward(params, d_logits / n_sentences, cache))
        return total / n_sentences, grads

    def predict_case(self, params, case):
        if not case:
            return np.zeros(0), np.zeros(0, dtype=np.int64)
        logits, _ = self.case_logits(params, case)
        probabilities = softmax(logits, axis=1)[:, 1]
        return probabilities, decide(probabilities)


class LstmCache(NamedTuple):
    front: FrontEndCache
    in_mask: Optional[np.ndarray]
    out_mask: Optional[np.ndarray]
    steps: list
    x_in: np.ndarray
    hs: np.ndarray
    h_out: np.ndarray


class LstmTagger(FrontEndTagger):
    """
    Encoder, fusion, one-directional one-layer LSTM and softmax output.

    Each case is one sequence starting from the zero state, so the output
    at position t depends only on sentences 0..t.
    """
    name = "lstm"

    def param_shapes(self):
        config = self.config
        shapes = front_end_shapes(config)
        shapes["lstm.weight"] = (config.hidden_dim + config.fusion_dim, 4 * config.hidden_dim)
        shapes["lstm.bias"] = (4 * config.hidden_dim,)
        shapes["output.weight"] = (config.hidden_dim, constants.N_CLASSES)
        shapes["output.bias"] = (constants.N_CLASSES,)
        return shapes

    def init_params(self, rng):
        config = self.config
        params = self._init_front_end(rng)
        params["lstm.weight"] = uniform(
            rng, (config.hidden_dim + config.fusion_dim, 4 * config.hidden_dim), config.init_scale)
        params["lstm.bias"] = np.zeros(4 * config.hidden_dim)
        params["output.weight"] = uniform(rng, (config.hidden_dim, constants.N_CLASSES), config.init_scale)
        params["output.bias"] = np.zeros(constants.N_CLASSES)
        return params

    def config_echo(self):
        return {"model": self.name, "dropout": self.dropout, **model_config_to_dict(self.config)}

    def case_logits(self, params, case, rng=None):
        x_h, front = self.front_forward(params, case)
        hidden = self.config.hidden_dim
        weight = params["lstm.weight"]
        if weight.shape != (hidden + x_h.shape[1], 4 * hidden):
            raise ShapeError(f"lstm.weight has shape {weight.shape}, expected {(hidden + x_h.shape[1], 4 * hidden)}")
        # x_h masks for the whole case are drawn before the h masks
        in_mask, out_mask = self._dropout_masks(rng, [x_h.shape, (len(case), hidden)])
        x_in = x_h if in_mask is None else x_h * in_mask

        x_proj = x_in @ weight[hidden:] + params["lstm.bias"]
        recurrent = weight[:hidden]
        state = LstmState.zeros(hidden)
        steps = []
        hs = np.zeros((len(case), hidden))
        for t in range(len(case)):
            state, step = lstm_recur(x_proj[t], state, recurrent)
            steps.append(step)
            hs[t] = state.h
        h_out = hs if out_mask is None else hs * out_mask
        logits = h_out @ params["output.weight"] + params["output.bias"]
        return logits, LstmCache(front, in_mask, out_mask, steps, x_in, hs, h_out)

    def case_backward(self, params, d_logits, cache):
        grads = {
            "output.weight": cache.h_out.T @ d_logits,
            "output.bias": d_logits.sum(axis=0),
        }
        d_hs = d_logits @ params["output.weight"].T
        if cache.out_mask is not None:
            d_hs = d_hs * cache.out_mask

        hidden = self.config.hidden_dim
        weight = params["lstm.weight"]
        recurrent = weight[:hidden]
        d_z = np.zeros((len(cache.steps), 4 * hidden))
        d_h_next = np.zeros(hidden)
        d_c_next = np.zeros(hidden)
        for t in reversed(range(len(cache.steps))):
            d_z[t], d_h_next, d_c_next = lstm_step_backward(
                d_hs[t] + d_h_next, d_c_next, cache.steps[t], recurrent)
        h_prev = np.vstack([np.zeros((1, hidden)), cache.hs[:-1]])
        grads["lstm.weight"] = np.concatenate([h_prev, cache.x_in], axis=1).T @ d_z
        grads["lstm.bias"] = d_z.sum(axis=0)
        d_x_in = d_z @ weight[hidden:].T

        d_x_h = d_x_in if cache.in_mask is None else d_x_in * cache.in_mask
        grads.update(self.front_backward(params, d_x_h, cache.front))
        return grads


def predict_sequence(
    case: CaseBundles,
    params: TensorSet,
    config: ModelConfig,
    mode: str = "eval",
    seed: int = 0,
    dropout: float = constants.DROPOUT,
) -> np.ndarray:
    """
    Per-sentence probability of a perpetrator mention for one case.

    Args:
        case: Bundles in seq_index order
        params: LSTM tensor set
        config: Model configuration matching params
        mode: ``eval`` (deterministic) or ``train`` (dropout drawn from seed)
        seed: Dropout seed in train mode
        dropout: Dropout rate in train mode

    Returns:
        Array of len(case) probabilities; empty for an empty case
    """
    if mode not in ("eval", "train"):
        raise ModelError(f"mode must be 'eval' or 'train', got {mode!r}")
    if not case:
        return np.zeros(0)
    tagger = LstmTagger(config, dropout=dropout)
    rng = np.random.default_rng(seed) if mode == "train" else None
    logits, _ = tagger.case_logits(params, case, rng)
    return softmax(logits, axis=1)[:, 1]
