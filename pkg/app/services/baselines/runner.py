import logging
from dataclasses import dataclass

import numpy as np

from app.core.config import RunConfig
from app.schemas.reports import BaselineModelReport, BaselineReport
from app.services.corpus import Corpus
from app.services.trainer import compute_metrics
from app.services.vectorize import count_matrix, fit_count_vectorizer, tfidf_fit, tfidf_matrix
from .logreg import predict_logreg, train_logreg
from .naive_bayes import predict_nb, train_nb
from .selection import grid_search, top_features

logger = logging.getLogger(__name__)


@dataclass
class BaselineOutcome:
    report: BaselineReport
    top_feature_rows: list[list]


def run_baselines(train: Corpus, test: Corpus, config: RunConfig) -> BaselineOutcome:
    """
    Logistic regression on TF-IDF (hyperparameters by grid search) and
    naive Bayes on raw counts, both fitted on the training split and scored
    on the test split.
    """
    settings = config.baseline
    labels = config.corpus.labels
    num_classes = len(labels)
    y_train = np.asarray(train.label_indices, dtype=np.int64)
    y_test = np.asarray(test.label_indices, dtype=np.int64)

    table = tfidf_fit(train)
    X_train, X_test = tfidf_matrix(train.texts(), table), tfidf_matrix(test.texts(), table)
    grid = grid_search(
        X_train, y_train, num_classes, settings.lr_grid, settings.l2_grid,
        settings.cv_folds, config.seed, settings.epochs, settings.batch_size,
    )
    logreg = train_logreg(X_train, y_train, num_classes, grid.lr, settings.epochs, grid.l2, config.seed, settings.batch_size)
    logreg_pred, _ = predict_logreg(logreg, X_test)

    counter = fit_count_vectorizer(train)
    nb = train_nb(count_matrix(train.texts(), counter), y_train, num_classes)
    nb_pred, _ = predict_nb(nb, count_matrix(test.texts(), counter))

    majority = int(np.bincount(y_train, minlength=num_classes).argmax())
    majority_accuracy = float((y_test == majority).mean()) if y_test.size else 0.0

    report = BaselineReport(
        models=[
            BaselineModelReport(
                model="logreg",
                selected={"lr": grid.lr, "l2": grid.l2},
                cv_accuracy=grid.cv_accuracy,
                metrics=compute_metrics(y_test, logreg_pred, labels),
            ),
            BaselineModelReport(model="naive_bayes", metrics=compute_metrics(y_test, nb_pred, labels)),
        ],
        majority_accuracy=majority_accuracy,
        config_digest=config.digest(),
    )
    rows = top_features(logreg.weights, table.terms, labels, settings.top_features, "logreg")
    rows += top_features(nb.feature_log_prob, list(counter.get_feature_names_out()), labels, settings.top_features, "naive_bayes")
    for model in report.models:
        logger.info(f"Baseline {model.model}: test accuracy {model.metrics.accuracy:.4f}")
    return BaselineOutcome(report=report, top_feature_rows=rows)
