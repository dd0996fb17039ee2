from .logreg import LogRegModel, loss_and_grad, predict_logreg, train_logreg
from .naive_bayes import NaiveBayesModel, nb_scores, predict_nb, train_nb
from .runner import BaselineOutcome, run_baselines
from .selection import TOP_FEATURES_HEADER, GridResult, grid_search, top_features

__all__ = [
    "BaselineOutcome",
    "GridResult",
    "LogRegModel",
    "NaiveBayesModel",
    "TOP_FEATURES_HEADER",
    "grid_search",
    "loss_and_grad",
    "nb_scores",
    "predict_logreg",
    "predict_nb",
    "run_baselines",
    "top_features",
    "train_logreg",
    "train_nb",
]
