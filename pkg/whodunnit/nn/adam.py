"""
ADAM optimizer over named tensors.
"""
from dataclasses import dataclass
from typing import Mapping, Tuple

import numpy as np

from whodunnit.errors import ModelError
from whodunnit.nn import constants
from whodunnit.nn.params import TensorSet, zeros_like


@dataclass
class AdamMoments:
    """First and second moment estimates, one tensor per parameter."""
    first: TensorSet
    second: TensorSet

    @classmethod
    def zeros(cls, params: Mapping[str, np.ndarray]) -> "AdamMoments":
        return cls(first=zeros_like(params), second=zeros_like(params))


def adam_step(
    params: TensorSet,
    grads: Mapping[str, np.ndarray],
    moments: AdamMoments,
    step_index: int,
    learning_rate: float = constants.LEARNING_RATE,
    beta1: float = constants.ADAM_BETA1,
    beta2: float = constants.ADAM_BETA2,
    epsilon: float = constants.ADAM_EPSILON,
) -> Tuple[TensorSet, AdamMoments]:
    """
    One bias-corrected ADAM update.

    Returns new tensors; the inputs are left untouched.

    Args:
        params: Current parameters
        grads: Gradients of the loss (to be minimized)
        moments: Moment estimates from the previous step
        step_index: 1-based update counter
    """
    if step_index < 1:
        raise ModelError(f"step_index must be >= 1, got {step_index}")
    first_correction = 1.0 - beta1 ** step_index
    second_correction = 1.0 - beta2 ** step_index
    updated, first, second = {}, {}, {}
    for name, value in params.items():
        grad = grads[name]
        first[name] = beta1 * moments.first[name] + (1.0 - beta1) * grad
        second[name] = beta2 * moments.second[name] + (1.0 - beta2) * grad * grad
        step = learning_rate * (first[name] / first_correction) / (
            np.sqrt(second[name] / second_correction) + epsilon)
        updated[name] = value - step
    return updated, AdamMoments(first=first, second=second)
