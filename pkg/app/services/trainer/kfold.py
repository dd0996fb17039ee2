import logging
from typing import Optional

import numpy as np

from app.core.config import RunConfig
from app.schemas.reports import KFoldSummary, MetricSummary, MetricsReport
from app.services.corpus import Corpus, apply_resample, kfold
from app.services.distill import run_algorithm1
from app.services.neuralnet import Checkpoint
from app.services.vectorize import build_vocab
from .training import evaluate, make_batch, train_student, train_teacher

logger = logging.getLogger(__name__)


def summary_metrics(report: MetricsReport) -> dict[str, float]:
    return {
        "accuracy": report.accuracy,
        "macro_precision": report.macro.precision,
        "macro_recall": report.macro.recall,
        "macro_f1": report.macro.f1,
        "weighted_precision": report.weighted.precision,
        "weighted_recall": report.weighted.recall,
        "weighted_f1": report.weighted.f1,
    }


def aggregate_reports(reports: list[MetricsReport]) -> dict[str, MetricSummary]:
    """Mean and population standard deviation of each headline metric."""
    table = [summary_metrics(report) for report in reports]
    return {
        name: MetricSummary(
            mean=float(np.mean([row[name] for row in table])),
            std=float(np.std([row[name] for row in table])),
        )
        for name in table[0]
    }


def run_kfold(corpus: Corpus, k: int, config: RunConfig, seed: Optional[int] = None) -> KFoldSummary:
    """
    Full pipeline per fold (vocabulary, teacher, transfer setup, student,
    evaluation), fitted on the fold's training part only.

    Folds run sequentially.
    """
    seed = config.seed if seed is None else seed
    label_names = config.corpus.labels
    reports: list[MetricsReport] = []
    digests: list[str] = []

    for fold_index, (fold_train, fold_valid) in enumerate(kfold(corpus, k, seed), start=1):
        logger.info(f"Fold {fold_index}/{k}: {len(fold_train)} train, {len(fold_valid)} validation samples")
        fold_train = apply_resample(fold_train, config.corpus.resample, seed)
        vocab = build_vocab(fold_train, config.vocab.min_freq)
        digests.append(vocab.digest())
        train_batch = make_batch(fold_train, vocab, config.vocab.max_len)

        teacher = train_teacher(train_batch, vocab, config, seed)
        transfer = run_algorithm1(
            Checkpoint(params=teacher.params, metadata={"vocab_digest": vocab.digest()}),
            train_batch,
            vocab,
            config,
        )
        student = train_student(train_batch, vocab, config, transfer.store, transfer.gmm, seed)
        report = evaluate(student.params, make_batch(fold_valid, vocab, config.vocab.max_len), label_names)
        report.config_digest = config.digest()
        reports.append(report)
        logger.info(f"Fold {fold_index}/{k}: accuracy {report.accuracy:.4f}, weighted F1 {report.weighted.f1:.4f}")

    return KFoldSummary(
        k=k,
        folds=reports,
        aggregate=aggregate_reports(reports),
        vocab_digests=digests,
        config_digest=config.digest(),
    )
