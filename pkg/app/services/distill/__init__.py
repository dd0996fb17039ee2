from .algorithm import FEATURES_FILE, GMM_FILE, GMM_REPORT_FILE, Algorithm1Result, run_algorithm1
from .features import (
    TeacherFeatureStore,
    compute_features,
    extract_teacher_features,
    load_feature_store,
    save_feature_store,
)
from .signals import (
    BatchSignals,
    DistillConfig,
    TransferSignal,
    compute_batch_signals,
    compute_signal,
    corpus_signals,
    euclidean_distance,
    write_signals_csv,
)

__all__ = [
    "Algorithm1Result",
    "BatchSignals",
    "DistillConfig",
    "FEATURES_FILE",
    "GMM_FILE",
    "GMM_REPORT_FILE",
    "TeacherFeatureStore",
    "TransferSignal",
    "compute_batch_signals",
    "compute_features",
    "compute_signal",
    "corpus_signals",
    "euclidean_distance",
    "extract_teacher_features",
    "load_feature_store",
    "run_algorithm1",
    "save_feature_store",
    "write_signals_csv",
]
