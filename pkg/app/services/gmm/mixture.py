"""Diagonal-covariance Gaussian mixture fitted by EM in log space."""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp
from sklearn.cluster import kmeans_plusplus

from app.core.exceptions import DimensionError, FitError

logger = logging.getLogger(__name__)

VAR_FLOOR = 1e-6
_LOG_2PI = np.log(2.0 * np.pi)


@dataclass
class GmmModel:
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    component_to_class: Optional[np.ndarray] = None
    iterations: int = 0
    log_likelihood: float = float("nan")
    converged: bool = False
    degenerate: bool = False
    var_floor: float = VAR_FLOOR
    history: list[float] = field(default_factory=list)
    config_digest: str = ""

    @property
    def num_components(self) -> int:
        return int(self.means.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.means.shape[1])


@dataclass
class GmmEval:
    """Evaluation of one point."""
    log_densities: np.ndarray
    posteriors: np.ndarray
    most_likely: int


@dataclass
class GmmBatchEval:
    """Stacked evaluations; rows are points."""
    log_densities: np.ndarray
    log_posteriors: np.ndarray
    posteriors: np.ndarray
    most_likely: np.ndarray

    def __getitem__(self, row: int) -> GmmEval:
        return GmmEval(self.log_densities[row], self.posteriors[row], int(self.most_likely[row]))


def _as_matrix(features: np.ndarray) -> np.ndarray:
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise DimensionError(f"Expected an N x D feature matrix, got shape {X.shape}")
    return X


def component_log_densities(model: GmmModel, X: np.ndarray) -> np.ndarray:
    """Unweighted per-component log densities, shape [N, K]."""
    X = _as_matrix(X)
    if X.shape[1] != model.dimension:
        raise DimensionError(f"Feature dimension {X.shape[1]} differs from mixture dimension {model.dimension}")
    diff = X[:, None, :] - model.means[None, :, :]
    quad = (diff ** 2 / model.variances[None, :, :]).sum(axis=2)
    log_det = np.log(model.variances).sum(axis=1)
    return -0.5 * (model.dimension * _LOG_2PI + log_det[None, :] + quad)


def _log_weights(model: GmmModel) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(model.weights)


def evaluate_batch(model: GmmModel, X: np.ndarray) -> GmmBatchEval:
    log_dens = component_log_densities(model, X)
    weighted = log_dens + _log_weights(model)[None, :]
    log_post = weighted - logsumexp(weighted, axis=1, keepdims=True)
    posteriors = np.exp(log_post)
    return GmmBatchEval(
        log_densities=log_dens,
        log_posteriors=log_post,
        posteriors=posteriors,
        most_likely=posteriors.argmax(axis=1),
    )


def evaluate(model: GmmModel, x: np.ndarray) -> GmmEval:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError(f"evaluate() takes a single vector, got shape {x.shape}")
    return evaluate_batch(model, x[None, :])[0]


def log_likelihood(model: GmmModel, X: np.ndarray) -> float:
    weighted = component_log_densities(model, X) + _log_weights(model)[None, :]
    return float(logsumexp(weighted, axis=1).sum())


def em_step(model: GmmModel, X: np.ndarray) -> tuple[GmmModel, float]:
    """
    One EM iteration.

    Returns the updated model and the log-likelihood of the data under the
    model passed in. Components that receive no responsibility keep their
    mean and variance with weight 0.
    """
    X = _as_matrix(X)
    n = X.shape[0]
    weighted = component_log_densities(model, X) + _log_weights(model)[None, :]
    totals = logsumexp(weighted, axis=1, keepdims=True)
    resp = np.exp(weighted - totals)
    ll = float(totals.sum())

    mass = resp.sum(axis=0)
    alive = mass > 0
    means = model.means.copy()
    variances = model.variances.copy()
    safe_mass = np.where(alive, mass, 1.0)
    new_means = (resp.T @ X) / safe_mass[:, None]
    means[alive] = new_means[alive]
    for k in np.flatnonzero(alive):
        centered = X - means[k]
        variances[k] = (resp[:, k] @ centered ** 2) / mass[k]
    variances = np.maximum(variances, model.var_floor)
    weights = mass / n
    updated = replace(model, weights=weights, means=means, variances=variances, history=list(model.history))
    return updated, ll


def _degenerate(X: np.ndarray, k: int, var_floor: float) -> GmmModel:
    weights = np.zeros(k)
    weights[0] = 1.0
    model = GmmModel(
        weights=weights,
        means=np.repeat(X[:1], k, axis=0),
        variances=np.full((k, X.shape[1]), var_floor),
        degenerate=True,
        converged=True,
        var_floor=var_floor,
    )
    model.log_likelihood = log_likelihood(model, X)
    return model


def fit(
    features: np.ndarray,
    num_components: int,
    seed: int,
    max_iter: int = 200,
    tol: float = 1e-6,
    var_floor: float = VAR_FLOOR,
) -> GmmModel:
    """
    Fit a diagonal mixture.

    Means are seeded by k-means++, weights start uniform and every component
    starts with the per-dimension data variance. Iteration stops when the
    relative log-likelihood improvement drops below `tol` or after
    `max_iter` iterations.

    Raises:
        FitError: fewer points than components, or non-finite features
    """
    X = _as_matrix(features)
    n, dim = X.shape
    if num_components < 1:
        raise FitError(f"num_components must be >= 1, got {num_components}")
    if n < num_components:
        raise FitError(f"Cannot fit {num_components} components to {n} points")
    if dim < 1:
        raise FitError("Features have no dimensions")
    if not np.all(np.isfinite(X)):
        raise FitError("Features contain NaN or Inf")

    if np.all(X == X[0]):
        logger.warning(f"All {n} feature vectors are identical; returning a single effective component")
        return _degenerate(X, num_components, var_floor)

    centers, _ = kmeans_plusplus(X, n_clusters=num_components, random_state=seed)
    model = GmmModel(
        weights=np.full(num_components, 1.0 / num_components),
        means=centers.astype(np.float64),
        variances=np.tile(np.maximum(X.var(axis=0), var_floor), (num_components, 1)),
        var_floor=var_floor,
    )

    history: list[float] = []
    for iteration in range(1, max_iter + 1):
        model, ll = em_step(model, X)
        history.append(ll)
        model.iterations = iteration
        if len(history) > 1 and history[-1] - history[-2] <= tol * abs(history[-2]):
            model.converged = True
            break

    model.history = history
    model.log_likelihood = log_likelihood(model, X)
    status = "converged" if model.converged else "hit max_iter"
    logger.info(
        f"GMM with {num_components} components on {n}x{dim} features {status} after "
        f"{model.iterations} iterations, log-likelihood {model.log_likelihood:.6f}"
    )
    return model


def map_components_to_classes(
    model: GmmModel, features: np.ndarray, labels: Sequence[int], num_classes: int
) -> GmmModel:
    """
    Assign each component the majority true class of its hard-assigned points.

    Ties go to the lower class index; a component with no points takes the
    class of the nearest (by mean) component that has points.
    """
    labels = np.asarray(labels, dtype=np.int64)
    assignments = evaluate_batch(model, features).most_likely
    if assignments.shape[0] != labels.shape[0]:
        raise DimensionError(f"{assignments.shape[0]} features but {labels.shape[0]} labels")

    mapping = np.full(model.num_components, -1, dtype=np.int64)
    for k in range(model.num_components):
        members = labels[assignments == k]
        if members.size:
            mapping[k] = int(np.bincount(members, minlength=num_classes).argmax())

    occupied = np.flatnonzero(mapping >= 0)
    for k in np.flatnonzero(mapping < 0):
        distances = np.linalg.norm(model.means[occupied] - model.means[k], axis=1)
        nearest = occupied[int(distances.argmin())]
        mapping[k] = mapping[nearest]
        logger.warning(f"GMM component {k} received no points; mapped to class {mapping[k]} via component {nearest}")
    return replace(model, component_to_class=mapping)
