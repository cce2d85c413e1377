"""
Central finite-difference check of reverse-mode gradients.
"""
import logging
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from whodunnit.nn import constants
from whodunnit.nn.params import TensorSet, copy_tensors


logger = logging.getLogger(__name__)


def _central_difference(loss_fn, probe: TensorSet, flat: np.ndarray, index: int, step: float) -> float:
    original = flat[index]
    flat[index] = original + step
    plus = loss_fn(probe)
    flat[index] = original - step
    minus = loss_fn(probe)
    flat[index] = original
    return (plus - minus) / (2.0 * step)


def gradient_check(
    loss_fn: Callable[[TensorSet], float],
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    rng: Optional[np.random.Generator] = None,
    step: float = constants.GRADCHECK_STEP,
    samples: int = constants.GRADCHECK_SAMPLES,
    floor: float = constants.GRADCHECK_FLOOR,
    tolerance: float = constants.GRADCHECK_TOLERANCE,
) -> Dict[str, float]:
    """
    Compare analytic gradients against central differences.

    Tensors with more than ``samples`` entries are checked on ``samples``
    coordinates drawn without replacement; smaller tensors on all of them.
    The error of a coordinate is |analytic - numeric| divided by the
    larger of |analytic|, |numeric| and ``floor``; a tensor reports its
    worst coordinate.

    Every coordinate is also differenced at half the step. When the two
    estimates disagree by more than ``tolerance`` the perturbation crossed
    a ReLU or max-pool kink, and the coordinate is left out.

    Args:
        loss_fn: Deterministic loss of a full parameter set
        params: Point of evaluation
        grads: Analytic gradients at params
        rng: Chooses the sampled coordinates; ``default_rng(0)`` when None

    Returns:
        Relative error per tensor name
    """
    if rng is None:
        rng = np.random.default_rng(0)
    probe = copy_tensors(params)
    errors = {}
    for name, value in probe.items():
        flat = value.reshape(-1)
        if flat.size <= samples:
            coordinates = np.arange(flat.size)
        else:
            coordinates = rng.choice(flat.size, size=samples, replace=False)
        analytic = np.asarray(grads[name]).reshape(-1)
        worst = 0.0
        kinks = 0
        for index in coordinates:
            numeric = _central_difference(loss_fn, probe, flat, index, step)
            halved = _central_difference(loss_fn, probe, flat, index, step / 2.0)
            if abs(numeric - halved) > tolerance * max(abs(numeric), floor):
                kinks += 1
                continue
            expected = analytic[index]
            worst = max(worst, abs(expected - numeric) / max(abs(expected), abs(numeric), floor))
        if kinks:
            logger.debug("Gradient check %s: %d of %d coordinates straddle a kink", name, kinks, len(coordinates))
        errors[name] = float(worst)
        logger.debug("Gradient check %s: relative error %.3g", name, errors[name])
    return errors
