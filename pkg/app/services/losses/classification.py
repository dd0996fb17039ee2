"""
Base losses over logits plus the reconstruction MSE.

Every function returns a LossResult whose `grad` is the gradient of the
batch value with respect to its first argument (logits or prediction).
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import log_softmax, softmax

from app.core.exceptions import ConfigurationError, DimensionError, NumericError

logger = logging.getLogger(__name__)

PROB_EPS = 1e-12
SMOOTH = 1e-6
_LOG_LOW = np.log(PROB_EPS)
_LOG_HIGH = np.log1p(-PROB_EPS)


@dataclass
class LossResult:
    value: float
    grad: np.ndarray
    per_sample: Optional[np.ndarray] = None


@dataclass
class SoftConfusion:
    """Per-class soft counts from predicted probabilities."""
    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray


def _check_logits(logits: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    logits = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    targets = np.atleast_1d(np.asarray(targets, dtype=np.int64))
    if logits.shape[1] < 2:
        raise DimensionError(f"Need at least 2 classes, got logits of shape {logits.shape}")
    if targets.shape != (logits.shape[0],):
        raise DimensionError(f"{logits.shape[0]} logit rows but targets of shape {targets.shape}")
    if targets.size and (targets.min() < 0 or targets.max() >= logits.shape[1]):
        raise DimensionError(f"Target index outside 0..{logits.shape[1] - 1}")
    if not np.all(np.isfinite(logits)):
        raise NumericError("Non-finite logits")
    return logits, targets


def _target_log_probs(logits: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(softmax probabilities, clipped log p_t)."""
    log_probs = log_softmax(logits, axis=1)
    log_pt = np.clip(log_probs[np.arange(len(targets)), targets], _LOG_LOW, _LOG_HIGH)
    return np.exp(log_probs), log_pt


def cross_entropy(logits: np.ndarray, targets: np.ndarray) -> LossResult:
    """Mean of -log softmax(logits)[target]."""
    logits, targets = _check_logits(logits, targets)
    batch = logits.shape[0]
    probs, log_pt = _target_log_probs(logits, targets)
    per_sample = -log_pt
    grad = probs.copy()
    grad[np.arange(batch), targets] -= 1.0
    return LossResult(value=float(per_sample.mean()), grad=grad / batch, per_sample=per_sample)


def _focal_weights(alpha_t: Optional[Sequence[float]], num_classes: int) -> np.ndarray:
    if alpha_t is None:
        return np.ones(num_classes)
    weights = np.asarray(alpha_t, dtype=np.float64)
    if weights.shape != (num_classes,):
        raise ConfigurationError(f"focal_alpha_t needs {num_classes} weights, got {len(weights)}")
    if np.any(weights < 0):
        raise ConfigurationError("focal_alpha_t weights must be >= 0")
    return weights


def focal_loss(
    logits: np.ndarray,
    targets: np.ndarray,
    alpha_t: Optional[Sequence[float]] = None,
    gamma: float = 2.0,
) -> LossResult:
    """Mean of -alpha_t[y] * (1 - p_t)^gamma * ln p_t with p_t clamped to [eps, 1 - eps]."""
    logits, targets = _check_logits(logits, targets)
    batch, num_classes = logits.shape
    weights = _focal_weights(alpha_t, num_classes)[targets]
    probs, log_pt = _target_log_probs(logits, targets)
    pt = np.exp(log_pt)
    one_minus = 1.0 - pt
    modulating = one_minus ** gamma
    per_sample = -weights * modulating * log_pt

    # dl/dp_t * p_t; the chain through softmax is p_t * (onehot - p).
    if gamma == 0:
        focusing = np.zeros_like(pt)
    else:
        focusing = gamma * one_minus ** (gamma - 1) * pt * log_pt
    dl_dpt_times_pt = -weights * (modulating - focusing)
    onehot = np.zeros_like(probs)
    onehot[np.arange(batch), targets] = 1.0
    grad = dl_dpt_times_pt[:, None] * (onehot - probs)
    return LossResult(value=float(per_sample.mean()), grad=grad / batch, per_sample=per_sample)


def soft_confusion(probs: np.ndarray, targets: np.ndarray, num_classes: Optional[int] = None) -> SoftConfusion:
    probs = np.atleast_2d(np.asarray(probs, dtype=np.float64))
    targets = np.atleast_1d(np.asarray(targets, dtype=np.int64))
    num_classes = num_classes or probs.shape[1]
    onehot = np.eye(num_classes)[targets]
    return SoftConfusion(
        tp=(probs * onehot).sum(axis=0),
        fp=(probs * (1.0 - onehot)).sum(axis=0),
        fn=((1.0 - probs) * onehot).sum(axis=0),
    )


def tversky_loss(conf: SoftConfusion, alpha: float = 0.3, beta: float = 0.7) -> float:
    index = (conf.tp + SMOOTH) / (conf.tp + alpha * conf.fp + beta * conf.fn + SMOOTH)
    return float(np.mean(1.0 - index))


def dice_loss(conf: SoftConfusion) -> float:
    index = (2.0 * conf.tp + 2.0 * SMOOTH) / (2.0 * conf.tp + conf.fp + conf.fn + 2.0 * SMOOTH)
    return float(np.mean(1.0 - index))


def tversky_from_logits(logits: np.ndarray, targets: np.ndarray, alpha: float = 0.3, beta: float = 0.7) -> LossResult:
    """Tversky loss on soft counts from softmax(logits), gradient chained through the softmax."""
    if alpha < 0 or beta < 0:
        raise ConfigurationError(f"Tversky alpha/beta must be >= 0, got {alpha}, {beta}")
    logits, targets = _check_logits(logits, targets)
    num_classes = logits.shape[1]
    probs = softmax(logits, axis=1)
    conf = soft_confusion(probs, targets, num_classes)
    onehot = np.eye(num_classes)[targets]

    numerator = conf.tp + SMOOTH
    denominator = conf.tp + alpha * conf.fp + beta * conf.fn + SMOOTH
    d_num = onehot
    d_den = onehot + alpha * (1.0 - onehot) - beta * onehot
    d_index = (d_num * denominator - numerator * d_den) / denominator ** 2
    d_probs = -d_index / num_classes
    grad = probs * (d_probs - (d_probs * probs).sum(axis=1, keepdims=True))
    return LossResult(value=tversky_loss(conf, alpha, beta), grad=grad)


def dice_from_logits(logits: np.ndarray, targets: np.ndarray) -> LossResult:
    result = tversky_from_logits(logits, targets, 0.5, 0.5)
    probs = softmax(np.atleast_2d(np.asarray(logits, dtype=np.float64)), axis=1)
    result.value = dice_loss(soft_confusion(probs, targets, probs.shape[1]))
    return result


def mse(prediction: np.ndarray, target: np.ndarray) -> LossResult:
    """Mean squared difference over all elements."""
    prediction = np.asarray(prediction, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if prediction.shape != target.shape:
        raise DimensionError(f"MSE shapes differ: {prediction.shape} vs {target.shape}")
    if prediction.size == 0:
        return LossResult(value=0.0, grad=np.zeros_like(prediction))
    diff = prediction - target
    per_sample = (diff ** 2).reshape(len(diff), -1).mean(axis=1) if diff.ndim > 1 else diff ** 2
    return LossResult(value=float(np.mean(diff ** 2)), grad=2.0 * diff / diff.size, per_sample=per_sample)
