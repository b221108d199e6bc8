"""
Adam updates over flat parameter vectors
"""

from dataclasses import replace
from typing import Tuple

import numpy as np

from common.utils import DimensionMismatchError
from ..models import AdamState


def adam_step(state: AdamState, params_flat: np.ndarray, grads_flat: np.ndarray) -> Tuple[np.ndarray, AdamState]:
    """
    One bias-corrected Adam update

    Args:
        state: Current optimizer state
        params_flat: Parameter vector
        grads_flat: Gradient vector, same length

    Returns:
        (new_params, new_state): inputs are not modified
    """
    params_flat = np.asarray(params_flat, dtype=np.float64)
    grads_flat = np.asarray(grads_flat, dtype=np.float64)
    if not (params_flat.shape == grads_flat.shape == state.first_moment.shape):
        raise DimensionMismatchError(
            f"Adam lengths disagree: params {params_flat.shape}, grads {grads_flat.shape}, "
            f"state {state.first_moment.shape}"
        )
    step = state.step_count + 1
    first = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads_flat
    second = state.beta2 * state.second_moment + (1.0 - state.beta2) * grads_flat * grads_flat
    first_hat = first / (1.0 - state.beta1 ** step)
    second_hat = second / (1.0 - state.beta2 ** step)
    new_params = params_flat - state.lr * first_hat / (np.sqrt(second_hat) + state.eps)
    return new_params, replace(state, step_count=step, first_moment=first, second_moment=second)
