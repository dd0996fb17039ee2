"""Pydantic schemas for the JSON reports a run writes."""

from .reports import (
    AveragedMetrics,
    BaselineModelReport,
    BaselineReport,
    ClassMetrics,
    EpochRecord,
    GmmComponentReport,
    GmmReport,
    KFoldSummary,
    MetricSummary,
    MetricsReport,
    TrainRunReport,
)

__all__ = [
    "AveragedMetrics",
    "BaselineModelReport",
    "BaselineReport",
    "ClassMetrics",
    "EpochRecord",
    "GmmComponentReport",
    "GmmReport",
    "KFoldSummary",
    "MetricSummary",
    "MetricsReport",
    "TrainRunReport",
]
