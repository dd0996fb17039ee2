"""Mini-batch SGD with optional momentum and weight decay."""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from app.core.exceptions import DivergenceError, ShapeError
from .layers import BatchStats
from .network import Gradients, Parameters

logger = logging.getLogger(__name__)

BN_MOMENTUM = 0.1


@dataclass
class SgdState:
    """Velocity buffers, keyed by parameter name."""
    velocity: dict[str, np.ndarray] = field(default_factory=dict)


def _update_running_stats(values: dict[str, np.ndarray], batch_stats: dict[str, BatchStats]) -> None:
    for block, stats in batch_stats.items():
        # Running variance tracks the unbiased estimate.
        correction = stats.count / (stats.count - 1) if stats.count > 1 else 1.0
        mean_key, var_key = f"{block}.running_mean", f"{block}.running_var"
        dtype = values[mean_key].dtype
        values[mean_key] = ((1 - BN_MOMENTUM) * values[mean_key] + BN_MOMENTUM * stats.mean).astype(dtype)
        values[var_key] = ((1 - BN_MOMENTUM) * values[var_key] + BN_MOMENTUM * stats.var * correction).astype(dtype)


def sgd_step(
    params: Parameters,
    grads: Gradients,
    lr: float,
    batch_size: int = 1,
    state: Optional[SgdState] = None,
    momentum: float = 0.0,
    weight_decay: float = 0.0,
) -> Parameters:
    """
    One update p <- p - lr * g on every trainable parameter.

    `grads` are summed over `batch_size` samples and divided here, so mean
    gradients are passed with batch_size=1. Batch-norm running statistics
    are folded in with momentum 0.1.

    Raises:
        DivergenceError: a gradient is not finite (names the parameter)
        ShapeError: a gradient does not match its parameter
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    values = dict(params.values)
    for name in params.trainable_names:
        grad = grads.values.get(name)
        if grad is None:
            continue
        if grad.shape != values[name].shape:
            raise ShapeError(f"Gradient for {name} has shape {grad.shape}, expected {values[name].shape}")
        if not np.all(np.isfinite(grad)):
            raise DivergenceError(f"Non-finite gradient for parameter {name}")

        step = grad / batch_size
        if weight_decay:
            step = step + weight_decay * values[name]
        if momentum and state is not None:
            velocity = momentum * state.velocity.get(name, np.zeros_like(step)) + step
            state.velocity[name] = velocity
            step = velocity
        values[name] = (values[name] - lr * step).astype(values[name].dtype)

    _update_running_stats(values, grads.batch_stats)
    return Parameters(params.config, values)
