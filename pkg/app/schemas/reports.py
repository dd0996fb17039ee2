"""Report schemas written as JSON artifacts."""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field


# Classification metrics
class ClassMetrics(BaseModel):
    """Precision/recall/F1 of one class."""
    label: str
    precision: float
    recall: float
    f1: float
    support: int


class AveragedMetrics(BaseModel):
    precision: float
    recall: float
    f1: float


class MetricsReport(BaseModel):
    """Evaluation of predictions against true labels."""
    accuracy: float
    per_class: List[ClassMetrics]
    macro: AveragedMetrics
    weighted: AveragedMetrics
    confusion: List[List[int]]  # rows: true class, columns: predicted class
    total: int
    config_digest: Optional[str] = None


class MetricSummary(BaseModel):
    mean: float
    std: float


class KFoldSummary(BaseModel):
    """Per-fold reports plus mean/std of the headline metrics."""
    k: int
    folds: List[MetricsReport]
    aggregate: Dict[str, MetricSummary]  # accuracy, macro_f1, weighted_f1, ...
    vocab_digests: List[str] = Field(default_factory=list)
    config_digest: Optional[str] = None


# Training runs
class EpochRecord(BaseModel):
    """One row of training_log.csv."""
    epoch: int
    base: float
    latentg_mean: float
    mse: float
    total: float
    modulation: float
    objective: float
    accuracy: float


class TrainRunReport(BaseModel):
    """Summary of a training run (run.json)."""
    role: str
    seed: int
    epochs: int
    checkpoint: str
    vocab_digest: str
    final: EpochRecord
    config_digest: Optional[str] = None


# Gaussian mixture
class GmmComponentReport(BaseModel):
    component: int
    weight: float
    mapped_class: int
    mapped_label: Optional[str] = None


class GmmReport(BaseModel):
    """Fit summary of the mixture over teacher feature vectors."""
    num_components: int
    dimension: int
    iterations: int
    converged: bool
    degenerate: bool
    final_log_likelihood: float
    components: List[GmmComponentReport]
    config_digest: Optional[str] = None


# Classical baselines
class BaselineModelReport(BaseModel):
    """Grid-search choice and test metrics of one classical model."""
    model: str
    selected: Dict[str, float] = Field(default_factory=dict)  # lr, l2 for logreg
    cv_accuracy: Optional[float] = None
    metrics: MetricsReport


class BaselineReport(BaseModel):
    models: List[BaselineModelReport]
    majority_accuracy: float
    config_digest: Optional[str] = None
