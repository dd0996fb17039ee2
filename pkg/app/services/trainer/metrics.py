"""Classification metrics over predicted and true class indices."""

from typing import Sequence

import numpy as np
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support

from app.core.exceptions import StatsError
from app.schemas.reports import AveragedMetrics, ClassMetrics, MetricsReport


def predict_classes(logits: np.ndarray) -> np.ndarray:
    """Argmax per row; ties go to the lowest class index."""
    return np.asarray(logits).argmax(axis=1)


def compute_metrics(y_true: Sequence[int], y_pred: Sequence[int], label_names: Sequence[str]) -> MetricsReport:
    """
    Accuracy, per-class and averaged precision/recall/F1, and the K x K
    confusion matrix (rows true, columns predicted). Classes without support
    or without predictions report 0.

    Raises:
        StatsError: no samples
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.size == 0:
        raise StatsError("Cannot compute metrics on an empty corpus")
    classes = list(range(len(label_names)))
    confusion = confusion_matrix(y_true, y_pred, labels=classes)
    precision, recall, f1, support = precision_recall_fscore_support(
        y_true, y_pred, labels=classes, zero_division=0
    )

    def averaged(average: str) -> AveragedMetrics:
        p, r, f, _ = precision_recall_fscore_support(
            y_true, y_pred, labels=classes, average=average, zero_division=0
        )
        return AveragedMetrics(precision=float(p), recall=float(r), f1=float(f))

    return MetricsReport(
        accuracy=float(np.trace(confusion) / y_true.size),
        per_class=[
            ClassMetrics(
                label=label_names[c],
                precision=float(precision[c]),
                recall=float(recall[c]),
                f1=float(f1[c]),
                support=int(support[c]),
            )
            for c in classes
        ],
        macro=averaged("macro"),
        weighted=averaged("weighted"),
        confusion=confusion.astype(int).tolist(),
        total=int(y_true.size),
    )


def confusion_rows(report: MetricsReport) -> tuple[list[str], list[list]]:
    """Header (predicted label names) and K x K integer rows of confusion.csv; row i is true class i."""
    return [c.label for c in report.per_class], [list(row) for row in report.confusion]
