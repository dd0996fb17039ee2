"""Tests for the TF-IDF logistic regression and naive Bayes baselines."""

import math

import numpy as np
import pytest
from scipy import sparse

from app.core.exceptions import DimensionError, FitError, LabelError
from app.services.baselines import (
    grid_search,
    loss_and_grad,
    nb_scores,
    predict_logreg,
    predict_nb,
    run_baselines,
    top_features,
    train_logreg,
    train_nb,
)
from app.services.baselines.logreg import LogRegModel
from app.services.corpus import SplitSpec, stratified_split


def separable(n_per: int = 40, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    a = np.column_stack([rng.uniform(0.8, 1.0, n_per), rng.uniform(0.0, 0.2, n_per)])
    b = np.column_stack([rng.uniform(0.0, 0.2, n_per), rng.uniform(0.8, 1.0, n_per)])
    return np.vstack([a, b]), np.repeat([0, 1], n_per)


class TestNaiveBayes:
    @pytest.fixture
    def model(self):
        counts = sparse.csr_matrix(np.array([[2, 0], [0, 1]]))
        return train_nb(counts, np.array([0, 1]), 2)

    def test_smoothed_probabilities(self, model):
        np.testing.assert_allclose(np.exp(model.feature_log_prob[0]), [3 / 4, 1 / 4])
        np.testing.assert_allclose(np.exp(model.feature_log_prob[1]), [1 / 3, 2 / 3])
        np.testing.assert_allclose(np.exp(model.class_log_prior), [0.5, 0.5])

    def test_joint_log_likelihood(self, model):
        scores = nb_scores(model, sparse.csr_matrix(np.array([[1, 1]])))
        assert scores[0, 0] == pytest.approx(math.log(0.5) + math.log(3 / 4) + math.log(1 / 4))
        assert scores[0, 1] == pytest.approx(math.log(0.5) + math.log(1 / 3) + math.log(2 / 3))

    def test_empty_document_falls_back_to_prior(self):
        counts = sparse.csr_matrix(np.array([[1, 0], [1, 0], [0, 1]]))
        model = train_nb(counts, np.array([1, 1, 0]), 2)
        predicted, scores = predict_nb(model, sparse.csr_matrix(np.zeros((1, 2))))
        np.testing.assert_allclose(scores[0], model.class_log_prior)
        assert predicted[0] == 1

    def test_class_without_documents(self):
        with pytest.raises(LabelError):
            train_nb(sparse.csr_matrix(np.ones((2, 2))), np.array([0, 0]), 2)

    def test_feature_count_mismatch(self, model):
        with pytest.raises(DimensionError):
            nb_scores(model, sparse.csr_matrix(np.ones((1, 3))))


class TestLogisticRegression:
    def test_separable_data(self):
        X, y = separable()
        model = train_logreg(X, y, 2, lr=1.0, epochs=60, l2=0.0, seed=0, batch_size=8)
        predicted, _ = predict_logreg(model, X)
        assert (predicted == y).mean() >= 0.99

    def test_l2_shrinks_weights(self):
        X, y = separable(seed=1)
        free = train_logreg(X, y, 2, lr=1.0, epochs=30, l2=0.0, seed=0)
        shrunk = train_logreg(X, y, 2, lr=1.0, epochs=30, l2=0.1, seed=0)
        assert np.linalg.norm(shrunk.weights) < np.linalg.norm(free.weights)

    def test_zero_weights_predict_bias_argmax(self):
        model = LogRegModel(weights=np.zeros((3, 2)), bias=np.array([0.1, 0.5, 0.2]), l2=0.0)
        predicted, _ = predict_logreg(model, np.ones((4, 2)))
        assert predicted.tolist() == [1, 1, 1, 1]

    def test_gradient_matches_finite_difference(self):
        rng = np.random.default_rng(2)
        X, y = rng.normal(size=(6, 3)), np.array([0, 1, 2, 0, 1, 2])
        weights, bias = rng.normal(size=(3, 3)), rng.normal(size=3)
        _, grad_w, grad_b = loss_and_grad(weights, bias, X, y, 0.05)
        h = 1e-6
        for index in [(0, 0), (2, 1)]:
            plus, minus = weights.copy(), weights.copy()
            plus[index] += h
            minus[index] -= h
            numeric = (loss_and_grad(plus, bias, X, y, 0.05)[0] - loss_and_grad(minus, bias, X, y, 0.05)[0]) / (2 * h)
            assert grad_w[index] == pytest.approx(numeric, abs=1e-6)
        plus_b = bias.copy()
        plus_b[1] += h
        minus_b = bias.copy()
        minus_b[1] -= h
        numeric_b = (loss_and_grad(weights, plus_b, X, y, 0.05)[0] - loss_and_grad(weights, minus_b, X, y, 0.05)[0]) / (2 * h)
        assert grad_b[1] == pytest.approx(numeric_b, abs=1e-6)

    def test_empty_training_set(self):
        with pytest.raises(FitError):
            train_logreg(np.zeros((0, 2)), np.zeros(0), 2, lr=1.0, epochs=1, l2=0.0, seed=0)


class TestSelection:
    def test_grid_tie_keeps_first_point(self):
        X, y = separable(n_per=12)
        result = grid_search(sparse.csr_matrix(X), y, 2, [0.0], [0.1, 0.2], folds=3, seed=0, epochs=2)
        assert (result.lr, result.l2) == (0.0, 0.1)
        assert len(result.table) == 2

    def test_grid_prefers_learning(self):
        X, y = separable(n_per=15)
        result = grid_search(sparse.csr_matrix(X), y, 2, [0.0, 1.0], [0.0], folds=3, seed=0, epochs=30)
        assert result.lr == 1.0
        assert result.cv_accuracy > 0.9

    def test_top_features(self):
        weights = np.array([[0.1, 0.9, 0.5], [0.3, 0.3, 0.0]])
        rows = top_features(weights, ["a", "b", "c"], ["X", "Y"], 2, "logreg")
        assert [row[3] for row in rows] == ["b", "c", "a", "b"]
        assert rows[0][:3] == ["logreg", "X", 1]


class TestRunBaselines:
    def test_report(self, fast_config, synthetic_corpus):
        train, test = stratified_split(synthetic_corpus, SplitSpec(test_fraction=0.25, seed=1))
        outcome = run_baselines(train, test, fast_config)
        names = [model.model for model in outcome.report.models]
        assert names == ["logreg", "naive_bayes"]
        for model in outcome.report.models:
            assert model.metrics.total == len(test)
        assert 0.0 <= outcome.report.majority_accuracy <= 1.0
        assert outcome.report.config_digest == fast_config.digest()
        per_model = fast_config.baseline.top_features * fast_config.num_classes()
        assert len(outcome.top_feature_rows) == 2 * per_model
