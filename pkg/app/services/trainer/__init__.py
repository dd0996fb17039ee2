from .kfold import aggregate_reports, run_kfold, summary_metrics
from .metrics import compute_metrics, confusion_rows, predict_classes
from .training import (
    LOG_HEADER,
    BatchObjective,
    SignalContext,
    TrainRun,
    batch_objective,
    evaluate,
    initial_params,
    make_batch,
    network_config_for,
    train_network,
    train_student,
    train_teacher,
)

__all__ = [
    "BatchObjective",
    "LOG_HEADER",
    "SignalContext",
    "TrainRun",
    "aggregate_reports",
    "batch_objective",
    "compute_metrics",
    "confusion_rows",
    "evaluate",
    "initial_params",
    "make_batch",
    "network_config_for",
    "predict_classes",
    "run_kfold",
    "summary_metrics",
    "train_network",
    "train_student",
    "train_teacher",
]
