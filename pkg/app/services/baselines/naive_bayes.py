"""Multinomial naive Bayes over raw term counts (add-one smoothing)."""

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import sparse
from sklearn.naive_bayes import MultinomialNB

from app.core.exceptions import DimensionError, FitError, LabelError

logger = logging.getLogger(__name__)

Matrix = Union[np.ndarray, sparse.spmatrix]


@dataclass
class NaiveBayesModel:
    class_log_prior: np.ndarray  # [K]
    feature_log_prob: np.ndarray  # [K, V]

    @property
    def num_features(self) -> int:
        return int(self.feature_log_prob.shape[1])


def train_nb(counts: Matrix, labels: np.ndarray, num_classes: int, smoothing: float = 1.0) -> NaiveBayesModel:
    """
    Raises:
        LabelError: a class has no training documents
        FitError: empty training set
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise FitError("Cannot train naive Bayes on an empty training set")
    present = np.bincount(labels, minlength=num_classes)
    missing = np.flatnonzero(present == 0)
    if missing.size:
        raise LabelError(f"Classes {missing.tolist()} have no training documents")

    estimator = MultinomialNB(alpha=smoothing, force_alpha=True)
    estimator.fit(counts, labels)
    return NaiveBayesModel(
        class_log_prior=estimator.class_log_prior_.copy(),
        feature_log_prob=estimator.feature_log_prob_.copy(),
    )


def nb_scores(model: NaiveBayesModel, counts: Matrix) -> np.ndarray:
    """Joint log-likelihood log P(c) + sum_t n_t log P(t | c)."""
    if counts.shape[1] != model.num_features:
        raise DimensionError(f"Input has {counts.shape[1]} features, model expects {model.num_features}")
    return np.asarray(counts @ model.feature_log_prob.T) + model.class_log_prior


def predict_nb(model: NaiveBayesModel, counts: Matrix) -> tuple[np.ndarray, np.ndarray]:
    class_scores = nb_scores(model, counts)
    return class_scores.argmax(axis=1), class_scores
