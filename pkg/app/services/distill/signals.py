"""
Per-sample transfer signals (p, dist) between student and frozen teacher.

Signals treat the teacher store and the mixture as constants; gradients are
taken with respect to the student feature vector only.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from app.core.config import DistillSettings
from app.core.exceptions import ContractError, DimensionError, StateError
from app.domain.enums import DistMode, PMode
from app.services.gmm import GmmModel, evaluate_batch
from app.services.losses import latentg_term
from app.services.neuralnet import Parameters, TokenBatch
from app.services.storage import LocalArtifactStore
from .features import TeacherFeatureStore, compute_features

logger = logging.getLogger(__name__)

DistillConfig = DistillSettings


@dataclass(frozen=True)
class TransferSignal:
    p: float
    dist: float
    component: int


@dataclass
class BatchSignals:
    """
    Signals for B samples.

    d_p and d_dist are per-sample gradients d p_i / d f_i and d dist_i / d f_i,
    shape [B, D].
    """
    sample_ids: np.ndarray
    p: np.ndarray
    dist: np.ndarray
    component: np.ndarray
    d_p: np.ndarray
    d_dist: np.ndarray

    def __len__(self) -> int:
        return int(self.p.shape[0])

    def __getitem__(self, row: int) -> TransferSignal:
        return TransferSignal(float(self.p[row]), float(self.dist[row]), int(self.component[row]))

    def latentg(self, alpha: float, beta: float) -> np.ndarray:
        return np.atleast_1d(latentg_term(self.p, self.dist, alpha, beta))

    def latentg_grad(self, alpha: float, beta: float) -> np.ndarray:
        """d latentg_i / d f_i, shape [B, D]."""
        return -alpha * self.d_p + beta * self.d_dist


def euclidean_distance(a: np.ndarray, b: np.ndarray, normalize: bool = False) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"Cannot compare vectors of shapes {a.shape} and {b.shape}")
    dist = float(np.sqrt(np.sum((a - b) ** 2)))
    return dist / np.sqrt(a.size) if normalize and a.size else dist


def _distances(
    features: np.ndarray, teacher: np.ndarray, latent_dim: int, config: DistillConfig
) -> tuple[np.ndarray, np.ndarray]:
    start = latent_dim if DistMode(config.dist_mode) is DistMode.LOGITS else 0
    diff = np.zeros_like(features)
    diff[:, start:] = features[:, start:] - teacher[:, start:]
    dist = np.sqrt((diff ** 2).sum(axis=1))
    scale = np.sqrt(features.shape[1] - start) if config.dist_normalize else 1.0
    safe = np.where(dist > 0, dist, 1.0)
    grad = np.where(dist[:, None] > 0, diff / safe[:, None], 0.0) / scale
    return dist / scale, grad


def _probabilities(
    features: np.ndarray, labels: np.ndarray, gmm: GmmModel, config: DistillConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    evaluation = evaluate_batch(gmm, features)
    resp = evaluation.posteriors
    most_likely = evaluation.most_likely
    rows = np.arange(features.shape[0])
    # d log N_k(f) / d f, shape [B, K, D]
    score = -(features[:, None, :] - gmm.means[None, :, :]) / gmm.variances[None, :, :]
    mean_score = np.einsum("bk,bkd->bd", resp, score)
    mode = PMode(config.p_mode)

    if mode is PMode.TRUE_CLASS_POSTERIOR:
        if gmm.component_to_class is None:
            raise StateError("Mixture has no component-to-class map; run map_components_to_classes first")
        selected = (np.asarray(gmm.component_to_class)[None, :] == labels[:, None]).astype(np.float64)
        weighted = resp * selected
        p = weighted.sum(axis=1)
        d_p = np.einsum("bk,bkd->bd", weighted, score) - p[:, None] * mean_score
    elif mode is PMode.MOST_LIKELY_POSTERIOR:
        p = resp[rows, most_likely]
        d_p = p[:, None] * (score[rows, most_likely] - mean_score)
    else:
        density = np.exp(evaluation.log_densities[rows, most_likely])
        p = np.clip(density, 0.0, 1.0)
        inside = (density > 0.0) & (density < 1.0)
        d_p = np.where(inside[:, None], density[:, None] * score[rows, most_likely], 0.0)

    p = np.clip(p, 0.0, 1.0)
    if np.any(~np.isfinite(p)):
        raise ContractError(f"Non-finite alignment probability under p_mode={mode.value}")
    return p, d_p, most_likely


def compute_batch_signals(
    features: np.ndarray,
    sample_ids: Sequence[int],
    labels: Sequence[int],
    store: TeacherFeatureStore,
    gmm: GmmModel,
    config: DistillConfig,
) -> BatchSignals:
    """
    Signals for a batch of student FeatureVectors.

    Raises:
        SampleLookupError: a sample id is missing from the teacher store
        DimensionError: student and teacher feature sizes differ
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    sample_ids = np.asarray(sample_ids, dtype=np.int64)
    teacher = store.lookup(sample_ids).astype(np.float64)
    if teacher.shape != features.shape:
        raise DimensionError(f"Student features {features.shape} vs teacher features {teacher.shape}")

    dist, d_dist = _distances(features, teacher, store.latent_dim, config)
    p, d_p, component = _probabilities(features, labels, gmm, config)
    if config.stop_gradient_signals:
        d_p = np.zeros_like(d_p)
        d_dist = np.zeros_like(d_dist)
    return BatchSignals(sample_ids=sample_ids, p=p, dist=dist, component=component, d_p=d_p, d_dist=d_dist)


def compute_signal(
    feature: np.ndarray,
    sample_id: int,
    store: TeacherFeatureStore,
    gmm: GmmModel,
    true_class: int,
    config: DistillConfig,
) -> TransferSignal:
    feature = np.asarray(feature, dtype=np.float64)
    return compute_batch_signals(feature[None, :], [sample_id], [true_class], store, gmm, config)[0]


def corpus_signals(
    params: Parameters,
    batch: TokenBatch,
    store: TeacherFeatureStore,
    gmm: GmmModel,
    config: DistillConfig,
) -> BatchSignals:
    """Eval-mode signals of a network over every sample of a batch."""
    features = compute_features(params, batch)
    return compute_batch_signals(features, batch.sample_ids, batch.labels, store, gmm, config)


def write_signals_csv(epoch: int, signals: BatchSignals, artifacts: LocalArtifactStore, prefix: str = "student/") -> str:
    key = f"{prefix}signals_epoch{epoch}.csv"
    rows = [
        [int(sample_id), f"{p:.12g}", f"{dist:.12g}", int(component)]
        for sample_id, p, dist, component in zip(signals.sample_ids, signals.p, signals.dist, signals.component)
    ]
    artifacts.write_csv(key, ["id", "p", "dist", "component"], rows)
    return key
