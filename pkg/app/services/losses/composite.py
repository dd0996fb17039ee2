"""Base-loss dispatch, the LatentG term and the scheduled total loss."""

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from app.core.config import LossSettings
from app.core.exceptions import ConfigurationError, ContractError
from app.domain.enums import BaseLoss
from .classification import (
    LossResult,
    cross_entropy,
    dice_from_logits,
    focal_loss,
    tversky_from_logits,
)

logger = logging.getLogger(__name__)

LossConfig = LossSettings
ArrayLike = Union[float, np.ndarray]

PER_SAMPLE_BASES = (BaseLoss.CE, BaseLoss.FOCAL)


@dataclass(frozen=True)
class TrainSchedule:
    """1-based epoch e of E."""
    epoch: int
    total_epochs: int

    def __post_init__(self) -> None:
        if self.total_epochs < 1:
            raise ConfigurationError(f"total_epochs must be >= 1, got {self.total_epochs}")
        if not 1 <= self.epoch <= self.total_epochs:
            raise ConfigurationError(f"epoch must be in [1, {self.total_epochs}], got {self.epoch}")

    @property
    def factor(self) -> float:
        return self.epoch / self.total_epochs


def _single_base(kind: BaseLoss, logits: np.ndarray, targets: np.ndarray, config: LossConfig) -> LossResult:
    if kind is BaseLoss.CE:
        return cross_entropy(logits, targets)
    if kind is BaseLoss.FOCAL:
        return focal_loss(logits, targets, config.focal_alpha_t, config.focal_gamma)
    if kind is BaseLoss.TVERSKY:
        return tversky_from_logits(logits, targets, config.tversky_alpha, config.tversky_beta)
    if kind is BaseLoss.DICE:
        return dice_from_logits(logits, targets)
    raise ConfigurationError(f"Unsupported base loss {kind}")


def base_loss(logits: np.ndarray, targets: np.ndarray, config: LossConfig) -> LossResult:
    """
    The loss in the base slot of the total loss.

    `mixture` sums the configured components with their weights; it keeps
    per-sample values only when every component has them.
    """
    kind = BaseLoss(config.base_loss)
    if kind is not BaseLoss.MIXTURE:
        return _single_base(kind, logits, targets, config)

    if not config.mixture_weights:
        raise ConfigurationError("base_loss=mixture needs loss.mixture_weights, e.g. ce:1.0,dice:0.5")
    value = 0.0
    grad = None
    per_sample = None
    per_sample_ok = True
    for name, weight in sorted(config.mixture_weights.items()):
        part = _single_base(BaseLoss(name), logits, targets, config)
        value += weight * part.value
        grad = weight * part.grad if grad is None else grad + weight * part.grad
        if part.per_sample is None:
            per_sample_ok = False
        elif per_sample_ok:
            per_sample = weight * part.per_sample if per_sample is None else per_sample + weight * part.per_sample
    return LossResult(value=value, grad=grad, per_sample=per_sample if per_sample_ok else None)


def latentg_term(p: ArrayLike, dist: ArrayLike, alpha: float, beta: float) -> ArrayLike:
    """
    alpha * (1 - p) + beta * dist.

    Raises:
        ContractError: p outside [0, 1] or negative dist
    """
    p_arr = np.asarray(p, dtype=np.float64)
    dist_arr = np.asarray(dist, dtype=np.float64)
    if np.any((p_arr < 0.0) | (p_arr > 1.0)) or np.any(~np.isfinite(p_arr)):
        raise ContractError(f"Alignment probability outside [0, 1]: {p_arr[(p_arr < 0) | (p_arr > 1)][:5]}")
    if np.any(dist_arr < 0.0) or np.any(~np.isfinite(dist_arr)):
        raise ContractError("Distance must be finite and >= 0")
    value = alpha * (1.0 - p_arr) + beta * dist_arr
    return float(value) if value.ndim == 0 else value


def total_loss(base: float, latentg: float, mse: float, schedule: TrainSchedule, gamma: float) -> float:
    """base * (1 + (e/E) * latentg) + gamma * mse."""
    return base * (1.0 + schedule.factor * latentg) + gamma * mse


def total_loss_partials(base: float, latentg: float, schedule: TrainSchedule, gamma: float) -> tuple[float, float, float]:
    """Partial derivatives of total_loss w.r.t. (base, latentg, mse)."""
    return 1.0 + schedule.factor * latentg, base * schedule.factor, gamma


@dataclass
class ComposedObjective:
    """Composite objective of one batch with its upstream gradients."""
    value: float
    base: float
    latentg: float
    mse: float
    modulation: float
    d_logits: np.ndarray
    d_latentg: np.ndarray
    d_reconstruction: np.ndarray

    @property
    def components(self) -> dict[str, float]:
        return {"base": self.base, "latentg": self.latentg, "mse": self.mse, "modulation": self.modulation}


def compose_objective(
    base: LossResult,
    latentg_values: np.ndarray,
    reconstruction: LossResult,
    schedule: TrainSchedule,
    gamma: float,
    per_sample: bool = False,
) -> ComposedObjective:
    """
    Combine batch terms into the total loss.

    By default base, latentg and mse are batch means composed as scalars.
    With `per_sample` the product is taken per sample before averaging,
    which needs a base loss with per-sample values (CE or focal).

    d_latentg holds d objective / d latentg_i for every sample i.
    """
    latentg_values = np.asarray(latentg_values, dtype=np.float64)
    batch = latentg_values.shape[0]
    factor = schedule.factor
    latentg_mean = float(latentg_values.mean()) if batch else 0.0
    modulation = 1.0 + factor * latentg_mean

    if not per_sample:
        d_base, d_lg, d_mse = total_loss_partials(base.value, latentg_mean, schedule, gamma)
        value = total_loss(base.value, latentg_mean, reconstruction.value, schedule, gamma)
        return ComposedObjective(
            value=value,
            base=base.value,
            latentg=latentg_mean,
            mse=reconstruction.value,
            modulation=modulation,
            d_logits=d_base * base.grad,
            d_latentg=np.full(batch, d_lg / batch),
            d_reconstruction=d_mse * reconstruction.grad,
        )

    if base.per_sample is None:
        raise ConfigurationError(f"Per-sample composition supports only {[b.value for b in PER_SAMPLE_BASES]}")
    scale = 1.0 + factor * latentg_values
    value = float(np.mean(base.per_sample * scale)) + gamma * reconstruction.value
    return ComposedObjective(
        value=value,
        base=base.value,
        latentg=latentg_mean,
        mse=reconstruction.value,
        modulation=modulation,
        d_logits=base.grad * scale[:, None],
        d_latentg=base.per_sample * factor / batch,
        d_reconstruction=gamma * reconstruction.grad,
    )
