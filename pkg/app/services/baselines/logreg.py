"""Multinomial logistic regression on sparse TF-IDF rows, trained by mini-batch gradient descent."""

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import sparse
from scipy.special import log_softmax, softmax

from app.core.exceptions import DimensionError, DivergenceError, FitError

logger = logging.getLogger(__name__)

Matrix = Union[np.ndarray, sparse.spmatrix]


@dataclass
class LogRegModel:
    weights: np.ndarray  # [K, V]
    bias: np.ndarray  # [K]
    l2: float

    @property
    def num_features(self) -> int:
        return int(self.weights.shape[1])


def scores(model: LogRegModel, X: Matrix) -> np.ndarray:
    if X.shape[1] != model.num_features:
        raise DimensionError(f"Input has {X.shape[1]} features, model expects {model.num_features}")
    return np.asarray(X @ model.weights.T) + model.bias


def loss_and_grad(
    weights: np.ndarray, bias: np.ndarray, X: Matrix, y: np.ndarray, l2: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy + (l2 / 2) * ||W||^2 and its gradients w.r.t. W and b."""
    n = X.shape[0]
    logits = np.asarray(X @ weights.T) + bias
    log_probs = log_softmax(logits, axis=1)
    loss = -log_probs[np.arange(n), y].mean() + 0.5 * l2 * np.sum(weights ** 2)
    delta = softmax(logits, axis=1)
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grad_w = np.asarray(X.T @ delta).T + l2 * weights
    return float(loss), grad_w, delta.sum(axis=0)


def train_logreg(
    X: Matrix,
    y: np.ndarray,
    num_classes: int,
    lr: float,
    epochs: int,
    l2: float,
    seed: int,
    batch_size: int = 32,
) -> LogRegModel:
    """
    Raises:
        FitError: empty training set
        DivergenceError: parameters become non-finite
    """
    X = sparse.csr_matrix(X) if not sparse.issparse(X) else X.tocsr()
    y = np.asarray(y, dtype=np.int64)
    n, num_features = X.shape
    if n == 0:
        raise FitError("Cannot train logistic regression on an empty training set")
    weights = np.zeros((num_classes, num_features))
    bias = np.zeros(num_classes)
    rng = np.random.default_rng(seed)

    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            rows = order[start:start + batch_size]
            _, grad_w, grad_b = loss_and_grad(weights, bias, X[rows], y[rows], l2)
            weights -= lr * grad_w
            bias -= lr * grad_b
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
            raise DivergenceError(f"Logistic regression diverged at epoch {epoch} (lr={lr}, l2={l2})")

    logger.debug(f"Trained logistic regression lr={lr} l2={l2} for {epochs} epochs on {n} rows")
    return LogRegModel(weights=weights, bias=bias, l2=l2)


def predict_logreg(model: LogRegModel, X: Matrix) -> tuple[np.ndarray, np.ndarray]:
    """(class indices, per-class scores); ties go to the lowest index."""
    class_scores = scores(model, X)
    return class_scores.argmax(axis=1), class_scores
