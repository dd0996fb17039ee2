"""
Subcommand implementations.

Each command reads its inputs from the run directory, writes its artifacts
back into it, and raises MissingArtifactError naming the producing
subcommand when a prerequisite is absent.
"""

import logging
from pathlib import Path
from typing import Optional

import numpy as np

from app.core.config import RunConfig
from app.core.exceptions import LabelSetMismatchError, VocabError
from app.domain.enums import ModelRole
from app.schemas.reports import MetricsReport, TrainRunReport
from app.services import corpus as corpus_service
from app.services.baselines import TOP_FEATURES_HEADER, run_baselines
from app.services.corpus import Corpus, CsvSchema, LabelSet, SplitSpec
from app.services.distill import (
    FEATURES_FILE,
    GMM_FILE,
    corpus_signals,
    load_feature_store,
    run_algorithm1,
    write_signals_csv,
)
from app.services.gmm import load_gmm
from app.services.neuralnet import Checkpoint, Parameters, load_checkpoint, save_checkpoint
from app.services.storage import LocalArtifactStore, file_digest
from app.services.trainer import (
    LOG_HEADER,
    TrainRun,
    confusion_rows,
    evaluate,
    make_batch,
    run_kfold,
    train_student,
    train_teacher,
)
from app.services.vectorize import (
    Vocabulary,
    build_vocab,
    export_tfidf_csv,
    export_vocab,
    load_vocab,
    tfidf_fit,
    tfidf_matrix,
)

logger = logging.getLogger(__name__)

SYNTHETIC_FILE = "synthetic.csv"
CORPUS_FILE = "corpus.csv"
VOCAB_FILE = "vocab.txt"
EFFECTIVE_CONFIG_FILE = "effective_config.txt"
CHECKPOINT_FILES = {ModelRole.TEACHER: "teacher/teacher.ckpt", ModelRole.STUDENT: "student/student.ckpt"}


def open_run(config: RunConfig) -> LocalArtifactStore:
    artifacts = LocalArtifactStore(config.output_dir, config.digest())
    artifacts.write_text(EFFECTIVE_CONFIG_FILE, config.to_flat_text())
    return artifacts


def label_set_of(config: RunConfig) -> LabelSet:
    return LabelSet.from_names(config.corpus.labels)


def _schema(config: RunConfig) -> CsvSchema:
    return CsvSchema(
        id_column=config.corpus.id_column,
        text_column=config.corpus.text_column,
        label_column=config.corpus.label_column,
    )


def _cleaned(corpus: Corpus, config: RunConfig) -> Corpus:
    stoplist = corpus_service.DEFAULT_STOPWORDS if config.corpus.remove_stopwords else None
    return corpus_service.clean_corpus(corpus, stoplist)


def _write_stats(artifacts: LocalArtifactStore, corpus: Corpus) -> None:
    class_rows, hist_rows = corpus_service.stats_rows(corpus_service.compute_stats(corpus))
    artifacts.write_csv("class_counts.csv", ["label", "count"], class_rows)
    artifacts.write_csv("length_hist.csv", ["word_count", "count"], hist_rows)


def _prepared(artifacts: LocalArtifactStore, config: RunConfig) -> tuple[Corpus, Corpus]:
    path = artifacts.require(CORPUS_FILE, "prep")
    return corpus_service.read_prepared(path, label_set_of(config))


def _vocab(artifacts: LocalArtifactStore) -> Vocabulary:
    return load_vocab(artifacts.require(VOCAB_FILE, "prep"))


# Data preparation
def cmd_synth(config: RunConfig, artifacts: LocalArtifactStore, n: int) -> Path:
    corpus = corpus_service.generate_synthetic(n, config.seed, label_set_of(config))
    artifacts.write_text(SYNTHETIC_FILE, corpus_service.render_corpus_csv(corpus))
    return artifacts.path(SYNTHETIC_FILE)


def cmd_prep(config: RunConfig, artifacts: LocalArtifactStore, input_path: Optional[Path]) -> None:
    """Load, clean, optionally augment, split, resample the training split, build the vocabulary."""
    source = input_path or artifacts.require(SYNTHETIC_FILE, "synth")
    corpus = _cleaned(corpus_service.load_csv(source, label_set_of(config), _schema(config)), config)
    if config.corpus.augment:
        outcome = corpus_service.augment(corpus)
        for failure in outcome.failures:
            logger.warning(failure)
        corpus = outcome.corpus
    spec = SplitSpec(test_fraction=config.corpus.test_fraction, seed=config.seed)
    train, test = corpus_service.stratified_split(corpus, spec)
    train = corpus_service.apply_resample(train, config.corpus.resample, config.seed)

    artifacts.write_text(CORPUS_FILE, corpus_service.render_prepared(train, test, artifacts.config_digest))
    _write_stats(artifacts, corpus)
    vocab = build_vocab(train, config.vocab.min_freq)
    artifacts.write_text(VOCAB_FILE, export_vocab(vocab, artifacts.config_digest))
    logger.info(f"Prepared {len(train)} train / {len(test)} test samples, vocabulary of {len(vocab)}")


def cmd_stats(config: RunConfig, artifacts: LocalArtifactStore, input_path: Optional[Path]) -> None:
    if input_path is not None:
        corpus = _cleaned(corpus_service.load_csv(input_path, label_set_of(config), _schema(config)), config)
    else:
        train, test = _prepared(artifacts, config)
        corpus = train.with_samples(train.samples + test.samples)
    _write_stats(artifacts, corpus)


def cmd_tfidf(config: RunConfig, artifacts: LocalArtifactStore) -> None:
    train, test = _prepared(artifacts, config)
    table = tfidf_fit(train)
    idf_rows = [[index, term, f"{table.idf[term]:.12g}"] for index, term in enumerate(table.terms)]
    artifacts.write_csv("idf.csv", ["term_index", "term", "idf"], idf_rows)
    for name, part in (("tfidf_train.csv", train), ("tfidf_test.csv", test)):
        matrix = tfidf_matrix(part.texts(), table)
        empty = int((np.diff(matrix.indptr) == 0).sum())
        if empty:
            logger.warning(f"{name}: {empty} document(s) contain only terms unseen at fit time")
        artifacts.write_text(name, export_tfidf_csv(part.ids, matrix, artifacts.config_digest))


# Networks
def _save_run(
    run: TrainRun, artifacts: LocalArtifactStore, config: RunConfig, vocab: Vocabulary, test: Corpus
) -> MetricsReport:
    role = run.role
    prefix = role.value
    checkpoint_key = CHECKPOINT_FILES[role]
    save_checkpoint(
        run.params,
        artifacts.path(checkpoint_key),
        metadata={
            "role": role.value,
            "labels": config.corpus.labels,
            "vocab_digest": vocab.digest(),
            "config_digest": config.digest(),
        },
    )
    artifacts.write_csv(f"{prefix}/training_log.csv", LOG_HEADER, run.log_rows())
    artifacts.write_json(
        f"{prefix}/run.json",
        TrainRunReport(
            role=role.value,
            seed=run.seed,
            epochs=len(run.records),
            checkpoint=checkpoint_key,
            vocab_digest=vocab.digest(),
            final=run.final,
            config_digest=run.config_digest,
        ),
    )
    return _write_metrics(run.params, artifacts, config, vocab, test, prefix)


def _write_metrics(
    params: Parameters, artifacts: LocalArtifactStore, config: RunConfig, vocab: Vocabulary, test: Corpus, prefix: str
) -> MetricsReport:
    report = evaluate(params, make_batch(test, vocab, config.vocab.max_len), config.corpus.labels)
    report.config_digest = config.digest()
    artifacts.write_json(f"{prefix}/metrics.json", report)
    header, rows = confusion_rows(report)
    artifacts.write_csv(f"{prefix}/confusion.csv", header, rows)
    logger.info(f"{prefix} test accuracy {report.accuracy:.4f}, weighted F1 {report.weighted.f1:.4f}")
    return report


def _load_network(artifacts: LocalArtifactStore, role: ModelRole, producer: str, vocab: Vocabulary) -> Checkpoint:
    checkpoint = load_checkpoint(artifacts.require(CHECKPOINT_FILES[role], producer))
    if checkpoint.vocab_digest and checkpoint.vocab_digest != vocab.digest():
        raise VocabError(
            f"{role.value} checkpoint was trained on vocabulary {checkpoint.vocab_digest}, "
            f"current vocabulary is {vocab.digest()}"
        )
    return checkpoint


def cmd_train_teacher(config: RunConfig, artifacts: LocalArtifactStore) -> MetricsReport:
    train, test = _prepared(artifacts, config)
    vocab = _vocab(artifacts)
    run = train_teacher(make_batch(train, vocab, config.vocab.max_len), vocab, config)
    return _save_run(run, artifacts, config, vocab, test)


def cmd_algorithm1(config: RunConfig, artifacts: LocalArtifactStore) -> None:
    train, _ = _prepared(artifacts, config)
    vocab = _vocab(artifacts)
    teacher = _load_network(artifacts, ModelRole.TEACHER, "train-teacher", vocab)
    run_algorithm1(
        teacher,
        make_batch(train, vocab, config.vocab.max_len),
        vocab,
        config,
        checkpoint_digest=file_digest(artifacts.path(CHECKPOINT_FILES[ModelRole.TEACHER])),
        artifacts=artifacts,
    )


def cmd_train_student(config: RunConfig, artifacts: LocalArtifactStore) -> MetricsReport:
    train, test = _prepared(artifacts, config)
    vocab = _vocab(artifacts)
    store = load_feature_store(artifacts.require(FEATURES_FILE, "algorithm1"))
    gmm = load_gmm(artifacts.require(GMM_FILE, "algorithm1"))
    batch = make_batch(train, vocab, config.vocab.max_len)

    on_epoch = None
    if config.distill.dump_signals:
        def on_epoch(epoch: int, params: Parameters) -> None:
            signals = corpus_signals(params, batch, store, gmm, config.distill)
            write_signals_csv(epoch, signals, artifacts)

    run = train_student(batch, vocab, config, store, gmm, on_epoch=on_epoch)
    return _save_run(run, artifacts, config, vocab, test)


def cmd_evaluate(config: RunConfig, artifacts: LocalArtifactStore, model: ModelRole) -> MetricsReport:
    """
    Raises:
        LabelSetMismatchError: the checkpoint was trained on a different label set
    """
    _, test = _prepared(artifacts, config)
    vocab = _vocab(artifacts)
    producer = "train-teacher" if model is ModelRole.TEACHER else "train-student"
    checkpoint = _load_network(artifacts, model, producer, vocab)
    if checkpoint.labels != list(config.corpus.labels):
        raise LabelSetMismatchError(
            f"{model.value} checkpoint labels {checkpoint.labels} differ from corpus labels {config.corpus.labels}"
        )
    return _write_metrics(checkpoint.params, artifacts, config, vocab, test, model.value)


# Experiments
def cmd_kfold(config: RunConfig, artifacts: LocalArtifactStore, k: Optional[int]) -> None:
    train, test = _prepared(artifacts, config)
    corpus = train.with_samples(train.samples + test.samples)
    folds = k or config.corpus.k_folds or 3
    summary = run_kfold(corpus, folds, config)
    artifacts.write_json("kfold_summary.json", summary)


def cmd_baseline(config: RunConfig, artifacts: LocalArtifactStore) -> None:
    train, test = _prepared(artifacts, config)
    outcome = run_baselines(train, test, config)
    artifacts.write_json("baseline_metrics.json", outcome.report)
    artifacts.write_csv("baseline_top_features.csv", TOP_FEATURES_HEADER, outcome.top_feature_rows)
