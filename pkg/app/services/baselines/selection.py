"""Grid search and informative-feature export for the classical baselines."""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np
from sklearn.model_selection import StratifiedKFold

from .logreg import Matrix, predict_logreg, train_logreg

logger = logging.getLogger(__name__)

TOP_FEATURES_HEADER = ["model", "label", "rank", "term", "score"]


@dataclass
class GridResult:
    lr: float
    l2: float
    cv_accuracy: float
    table: list[tuple[float, float, float]] = field(default_factory=list)


def grid_search(
    X: Matrix,
    y: np.ndarray,
    num_classes: int,
    lr_grid: Sequence[float],
    l2_grid: Sequence[float],
    folds: int,
    seed: int,
    epochs: int,
    batch_size: int = 32,
) -> GridResult:
    """
    Stratified k-fold CV over every (lr, l2) pair; the best mean accuracy
    wins and ties keep the earlier grid point.
    """
    y = np.asarray(y, dtype=np.int64)
    splits = list(StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed).split(np.zeros(len(y)), y))
    table: list[tuple[float, float, float]] = []
    best = None
    for lr, l2 in product(lr_grid, l2_grid):
        accuracies = []
        for train_rows, valid_rows in splits:
            model = train_logreg(X[train_rows], y[train_rows], num_classes, lr, epochs, l2, seed, batch_size)
            predicted, _ = predict_logreg(model, X[valid_rows])
            accuracies.append(float((predicted == y[valid_rows]).mean()))
        mean_accuracy = float(np.mean(accuracies))
        table.append((lr, l2, mean_accuracy))
        logger.info(f"Grid point lr={lr} l2={l2}: mean CV accuracy {mean_accuracy:.4f}")
        if best is None or mean_accuracy > best[2]:
            best = (lr, l2, mean_accuracy)
    return GridResult(lr=best[0], l2=best[1], cv_accuracy=best[2], table=table)


def top_features(
    weights: np.ndarray,
    terms: Sequence[str],
    label_names: Sequence[str],
    n: int,
    model_name: str,
) -> list[list]:
    """The n highest-weighted terms per class as (model, label, rank, term, score) rows."""
    rows = []
    for class_index, label in enumerate(label_names):
        order = np.argsort(-weights[class_index], kind="stable")[:n]
        for rank, term_index in enumerate(order, start=1):
            rows.append([model_name, label, rank, terms[term_index], f"{weights[class_index, term_index]:.12g}"])
    return rows
