"""
Linear-chain conditional random field over two labels.

Scores: unary[t, y] = x_t W[:, y] + b[y] and transition[y_prev, y_next].
All recursions run in log space.
"""
import logging
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from whodunnit.baselines.constants import CRF_L2, CRF_TOKENS
from whodunnit.errors import ModelError, NonFiniteLossError, ShapeError
from whodunnit.nn import constants
from whodunnit.nn.config import Modalities
from whodunnit.nn.model import Tagger, gold_labels
from whodunnit.nn.params import TensorSet, zeros_like
from whodunnit.signal.constants import ACOUSTIC_DIM, VISUAL_DIM


logger = logging.getLogger(__name__)

N_LABELS = constants.N_CLASSES


def unary_scores(features: np.ndarray, params: Dict[str, np.ndarray]) -> np.ndarray:
    features = np.atleast_2d(features)
    weight = params["crf.unary.weight"]
    if features.shape[1] != weight.shape[0]:
        raise ShapeError(f"CRF features have width {features.shape[1]}, weight expects {weight.shape[0]}")
    return features @ weight + params["crf.unary.bias"]


def forward_log_partition(unary: np.ndarray, transition: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Forward recursion.

    Returns:
        (log_alpha of shape (T, labels), log partition)
    """
    log_alpha = np.zeros_like(unary)
    log_alpha[0] = unary[0]
    for t in range(1, len(unary)):
        log_alpha[t] = unary[t] + logsumexp(log_alpha[t - 1][:, None] + transition, axis=0)
    return log_alpha, float(logsumexp(log_alpha[-1]))


def backward_log_partition(unary: np.ndarray, transition: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Backward recursion.

    Returns:
        (log_beta of shape (T, labels), log partition)
    """
    log_beta = np.zeros_like(unary)
    for t in range(len(unary) - 2, -1, -1):
        log_beta[t] = logsumexp(transition + (unary[t + 1] + log_beta[t + 1])[None, :], axis=1)
    return log_beta, float(logsumexp(unary[0] + log_beta[0]))


def crf_marginals(features: np.ndarray, params: Dict[str, np.ndarray]) -> np.ndarray:
    """Posterior label probabilities per position, shape (T, labels)."""
    if len(features) == 0:
        return np.zeros((0, N_LABELS))
    unary = unary_scores(features, params)
    log_alpha, log_z = forward_log_partition(unary, params["crf.transition"])
    log_beta, _ = backward_log_partition(unary, params["crf.transition"])
    return np.exp(log_alpha + log_beta - log_z)


def sequence_score(unary: np.ndarray, transition: np.ndarray, labels: np.ndarray) -> float:
    """Unnormalized log score of one labeling."""
    labels = np.asarray(labels, dtype=np.int64)
    score = unary[np.arange(len(labels)), labels].sum()
    score += transition[labels[:-1], labels[1:]].sum()
    return float(score)


def crf_loglik_and_grads(
    features: np.ndarray,
    gold: np.ndarray,
    params: Dict[str, np.ndarray],
    case_key: Optional[str] = None,
) -> Tuple[float, TensorSet]:
    """
    Conditional log-likelihood of the gold labeling and its gradient.

    Gradients are observed minus expected feature counts, the
    expectations coming from forward-backward.

    Raises:
        ModelError: Empty sequence
        NonFiniteLossError: Non-finite log-likelihood
    """
    features = np.atleast_2d(features)
    gold = np.asarray(gold, dtype=np.int64)
    if len(gold) == 0:
        raise ModelError("CRF log-likelihood of an empty sequence")
    transition = params["crf.transition"]
    unary = unary_scores(features, params)
    log_alpha, log_z = forward_log_partition(unary, transition)
    log_beta, _ = backward_log_partition(unary, transition)
    loglik = sequence_score(unary, transition, gold) - log_z
    if not np.isfinite(loglik):
        logger.error("Non-finite CRF log-likelihood on case %s", case_key)
        raise NonFiniteLossError("non-finite CRF log-likelihood", case_key)

    node = np.exp(log_alpha + log_beta - log_z)
    d_unary = -node
    d_unary[np.arange(len(gold)), gold] += 1.0

    d_transition = np.zeros_like(transition)
    np.add.at(d_transition, (gold[:-1], gold[1:]), 1.0)
    if len(gold) > 1:
        pair = (log_alpha[:-1, :, None] + transition[None, :, :]
                + (unary[1:] + log_beta[1:])[:, None, :] - log_z)
        d_transition -= np.exp(pair).sum(axis=0)

    grads = {
        "crf.unary.weight": features.T @ d_unary,
        "crf.unary.bias": d_unary.sum(axis=0),
        "crf.transition": d_transition,
    }
    return loglik, grads


def crf_decode(features: np.ndarray, params: Dict[str, np.ndarray]) -> np.ndarray:
    """
    Viterbi labeling.

    The table holds suffix scores and is read forward, so among equally
    scored labelings the one with label 0 at the earliest differing
    position wins.
    """
    if len(features) == 0:
        return np.zeros(0, dtype=np.int64)
    unary = unary_scores(features, params)
    transition = params["crf.transition"]
    length = len(unary)
    # suffix[t, y]: best score of positions t.. given label y at t
    suffix = np.zeros((length, N_LABELS))
    suffix[-1] = unary[-1]
    for t in range(length - 2, -1, -1):
        suffix[t] = unary[t] + (transition + suffix[t + 1][None, :]).max(axis=1)
    labels = np.zeros(length, dtype=np.int64)
    labels[0] = int(suffix[0].argmax())
    for t in range(1, length):
        labels[t] = int((transition[labels[t - 1]] + suffix[t]).argmax())
    return labels


class CrfTagger(Tagger):
    """
    CRF on the concatenated frozen embeddings of the first n_tokens tokens.

    Visual and acoustic vectors are appended only when their modality is
    enabled; by default the CRF is text-only.
    """
    name = "crf"

    def __init__(
        self,
        embeddings: np.ndarray,
        n_tokens: int = CRF_TOKENS,
        l2: float = CRF_L2,
        modalities: Modalities = Modalities(text=True, visual=False, acoustic=False),
        visual_dim: int = VISUAL_DIM,
        acoustic_dim: int = ACOUSTIC_DIM,
    ):
        self.embeddings = np.asarray(embeddings, dtype=np.float64)
        self.n_tokens = n_tokens
        self.l2 = l2
        self.modalities = modalities
        self.visual_dim = visual_dim
        self.acoustic_dim = acoustic_dim

    @property
    def feature_dim(self) -> int:
        dim = self.n_tokens * self.embeddings.shape[1]
        if self.modalities.visual:
            dim += self.visual_dim
        if self.modalities.acoustic:
            dim += self.acoustic_dim
        return dim

    def features(self, case) -> np.ndarray:
        """(T, feature_dim) matrix; sentences shorter than n_tokens are zero-padded."""
        rows = []
        for bundle in case:
            ids = np.zeros(self.n_tokens, dtype=np.int64)
            mask = np.zeros(self.n_tokens)
            count = min(self.n_tokens, len(bundle.token_ids))
            ids[:count] = bundle.token_ids[:count]
            mask[:count] = bundle.token_mask[:count]
            parts = [(self.embeddings[ids] * mask[:, None]).reshape(-1)]
            if self.modalities.visual:
                parts.append(bundle.x_v)
            if self.modalities.acoustic:
                parts.append(bundle.x_a)
            rows.append(np.concatenate(parts))
        return np.vstack(rows) if rows else np.zeros((0, self.feature_dim))

    def param_shapes(self):
        return {
            "crf.unary.weight": (self.feature_dim, N_LABELS),
            "crf.unary.bias": (N_LABELS,),
            "crf.transition": (N_LABELS, N_LABELS),
        }

    def init_params(self, rng):
        return {name: np.zeros(shape) for name, shape in self.param_shapes().items()}

    def config_echo(self):
        return {
            "model": self.name,
            "crf_tokens": self.n_tokens,
            "l2": self.l2,
            "modalities": self.modalities.label,
            "embedding_dim": int(self.embeddings.shape[1]),
            "visual_dim": self.visual_dim,
            "acoustic_dim": self.acoustic_dim,
        }

    def loss_and_grads(self, params, cases, rng=None):
        """Negative log-likelihood per sentence plus an L2 penalty on the weights."""
        n_sentences = sum(len(case) for case in cases)
        if n_sentences == 0:
            raise ModelError("loss requested for a batch without sentences")
        grads = zeros_like(params)
        total = 0.0
        for case in cases:
            if not case:
                continue
            loglik, case_grads = crf_loglik_and_grads(
                self.features(case), gold_labels(case), params, case[0].case_key)
            total -= loglik
            for name, value in case_grads.items():
                grads[name] -= value / n_sentences
        loss = total / n_sentences
        for name in ("crf.unary.weight", "crf.transition"):
            loss += 0.5 * self.l2 * float(np.sum(params[name] ** 2))
            grads[name] += self.l2 * params[name]
        return loss, grads

    def predict_case(self, params, case):
        features = self.features(case)
        return crf_marginals(features, params)[:, 1], crf_decode(features, params)
