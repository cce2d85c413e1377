"""
Best achievable f1 on a synthetic dataset, from its realized latent flags.
"""
import logging
from typing import Union

import numpy as np

from whodunnit.errors import SynthError
from whodunnit.evaluation.metrics import prf_from_labels
from whodunnit.synthgen.generator import SynthDataset, SynthRecord


logger = logging.getLogger(__name__)


def _best_f1(gold: np.ndarray, *rules: np.ndarray) -> float:
    return max(prf_from_labels(rule, gold).f1 for rule in rules)


def bayes_rate(dataset: Union[SynthDataset, SynthRecord], memoryless: bool) -> float:
    """
    f1 of the optimal predictor that sees the current sentence only
    (memoryless) or the whole history so far.

    Observable are the candidate flag of the current sentence when any
    channel is enabled, and the trigger token of every past sentence. The
    optimal rule is a threshold on the posterior, so the best f1 is the
    best over the thresholded rules a predictor of that kind can express.

    Raises:
        SynthError: Input carries no generator latents
    """
    if not isinstance(dataset, (SynthDataset, SynthRecord)) or not dataset.latents:
        raise SynthError("bayes_rate needs a synthetic dataset with latent flags")
    spec = dataset.spec
    lag = spec.history_lag
    observable = bool(spec.channels)

    gold, candidate, lagged = [], [], []
    for key in sorted(dataset.latents):
        latents = dataset.latents[key]
        cand = np.array(latents.candidate, dtype=bool)
        trig = np.array(latents.trigger, dtype=bool)
        past = np.zeros_like(cand)
        if lag > 0:
            past[lag:] = trig[:-lag]
            labels = cand & past
        else:
            labels = cand.copy()
        gold.append(labels)
        candidate.append(cand)
        lagged.append(past)
    gold = np.concatenate(gold)
    candidate = np.concatenate(candidate)
    lagged = np.concatenate(lagged)
    everything = np.ones_like(gold)

    if not observable:
        history_visible = lag > 0 and not memoryless
        rate = _best_f1(gold, lagged, everything) if history_visible else _best_f1(gold, everything)
    elif memoryless and lag > 0:
        rate = _best_f1(gold, candidate, everything)
    else:
        rate = _best_f1(gold, candidate & lagged if lag > 0 else candidate)
    logger.debug("Bayes rate (%s): %.4f", "memoryless" if memoryless else "full history", rate)
    return float(rate)
