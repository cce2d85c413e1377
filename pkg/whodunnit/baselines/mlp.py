"""
Per-sentence multi-layer perceptron on the shared encoder and fusion front-end.
"""
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import softmax

from whodunnit.baselines.constants import MLP_HIDDEN_DIMS
from whodunnit.errors import ModelError
from whodunnit.nn import constants
from whodunnit.nn.config import ModelConfig, model_config_to_dict
from whodunnit.nn.model import FrontEndCache, FrontEndTagger
from whodunnit.nn.params import front_end_shapes, uniform


class MlpCache(NamedTuple):
    front: FrontEndCache
    in_mask: Optional[np.ndarray]
    out_mask: Optional[np.ndarray]
    x_in: np.ndarray
    hidden_pre: list
    hidden_out: list


class MlpTagger(FrontEndTagger):
    """
    x_h -> ReLU -> ReLU -> softmax, independently for every sentence.

    Dropout (training only) is applied to x_h and to the last hidden layer.
    """
    name = "mlp"

    def __init__(
        self,
        config: ModelConfig,
        embeddings: Optional[np.ndarray] = None,
        dropout: float = constants.DROPOUT,
        hidden_dims: Sequence[int] = MLP_HIDDEN_DIMS,
    ):
        super().__init__(config, embeddings, dropout)
        if not hidden_dims:
            raise ModelError("the MLP needs at least one hidden layer")
        self.hidden_dims = tuple(hidden_dims)

    def _layer_dims(self):
        dims = (self.config.fusion_dim,) + self.hidden_dims
        return list(zip(dims[:-1], dims[1:]))

    def param_shapes(self):
        shapes = front_end_shapes(self.config)
        for layer, (fan_in, fan_out) in enumerate(self._layer_dims(), 1):
            shapes[f"mlp.hidden{layer}.weight"] = (fan_in, fan_out)
            shapes[f"mlp.hidden{layer}.bias"] = (fan_out,)
        shapes["output.weight"] = (self.hidden_dims[-1], constants.N_CLASSES)
        shapes["output.bias"] = (constants.N_CLASSES,)
        return shapes

    def init_params(self, rng):
        params = self._init_front_end(rng)
        for layer, (fan_in, fan_out) in enumerate(self._layer_dims(), 1):
            params[f"mlp.hidden{layer}.weight"] = uniform(rng, (fan_in, fan_out), self.config.init_scale)
            params[f"mlp.hidden{layer}.bias"] = np.zeros(fan_out)
        params["output.weight"] = uniform(rng, (self.hidden_dims[-1], constants.N_CLASSES), self.config.init_scale)
        params["output.bias"] = np.zeros(constants.N_CLASSES)
        return params

    def config_echo(self):
        return {
            "model": self.name,
            "dropout": self.dropout,
            "hidden_dims": list(self.hidden_dims),
            **model_config_to_dict(self.config),
        }

    def case_logits(self, params, case, rng=None):
        x_h, front = self.front_forward(params, case)
        in_mask, out_mask = self._dropout_masks(rng, [x_h.shape, (len(case), self.hidden_dims[-1])])
        x_in = x_h if in_mask is None else x_h * in_mask
        hidden_pre, hidden_out = [], []
        activation = x_in
        for layer in range(1, len(self.hidden_dims) + 1):
            pre = activation @ params[f"mlp.hidden{layer}.weight"] + params[f"mlp.hidden{layer}.bias"]
            activation = np.maximum(pre, 0.0)
            hidden_pre.append(pre)
            hidden_out.append(activation)
        if out_mask is not None:
            activation = activation * out_mask
        logits = activation @ params["output.weight"] + params["output.bias"]
        return logits, MlpCache(front, in_mask, out_mask, x_in, hidden_pre, hidden_out)

    def case_backward(self, params, d_logits, cache):
        last = cache.hidden_out[-1] if cache.out_mask is None else cache.hidden_out[-1] * cache.out_mask
        grads = {
            "output.weight": last.T @ d_logits,
            "output.bias": d_logits.sum(axis=0),
        }
        d_activation = d_logits @ params["output.weight"].T
        if cache.out_mask is not None:
            d_activation = d_activation * cache.out_mask
        for layer in range(len(self.hidden_dims), 0, -1):
            d_pre = d_activation * (cache.hidden_pre[layer - 1] > 0)
            below = cache.x_in if layer == 1 else cache.hidden_out[layer - 2]
            grads[f"mlp.hidden{layer}.weight"] = below.T @ d_pre
            grads[f"mlp.hidden{layer}.bias"] = d_pre.sum(axis=0)
            d_activation = d_pre @ params[f"mlp.hidden{layer}.weight"].T
        d_x_h = d_activation if cache.in_mask is None else d_activation * cache.in_mask
        grads.update(self.front_backward(params, d_x_h, cache.front))
        return grads


def mlp_predict(
    bundle,
    params,
    config: ModelConfig,
    mode: str = "eval",
    seed: int = 0,
    dropout: float = constants.DROPOUT,
    hidden_dims: Sequence[int] = MLP_HIDDEN_DIMS,
) -> float:
    """Probability of a perpetrator mention for a single sentence; train mode applies seeded dropout."""
    if mode not in ("eval", "train"):
        raise ModelError(f"mode must be 'eval' or 'train', got {mode!r}")
    tagger = MlpTagger(config, dropout=dropout, hidden_dims=hidden_dims)
    rng = np.random.default_rng(seed) if mode == "train" else None
    logits, _ = tagger.case_logits(params, [bundle], rng)
    return float(softmax(logits, axis=1)[0, 1])
