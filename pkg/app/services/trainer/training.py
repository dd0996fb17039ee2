"""Training loops for the teacher and student networks."""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from app.core.config import LossSettings, RunConfig
from app.core.exceptions import ConfigurationError, DivergenceError, VocabError
from app.domain.enums import ModelMode, ModelRole
from app.schemas.reports import EpochRecord, MetricsReport
from app.services.corpus import Corpus
from app.services.distill import BatchSignals, DistillConfig, TeacherFeatureStore, compute_batch_signals, compute_features
from app.services.gmm import GmmModel
from app.services.losses import ComposedObjective, TrainSchedule, base_loss, compose_objective, mse, total_loss
from app.services.neuralnet import (
    Gradients,
    NetworkConfig,
    Parameters,
    SgdState,
    TokenBatch,
    backward,
    forward,
    init_params,
    load_text_embeddings,
    reconstruction_target,
    sgd_step,
)
from app.services.vectorize import Vocabulary, encode_corpus
from .metrics import compute_metrics, predict_classes

logger = logging.getLogger(__name__)

LOG_HEADER = ["epoch", "base", "latentg_mean", "mse", "total", "modulation", "objective", "accuracy"]


@dataclass
class SignalContext:
    """Frozen teacher artifacts the student objective reads its signals from."""
    store: TeacherFeatureStore
    gmm: GmmModel
    distill: DistillConfig
    alpha: float
    beta: float


@dataclass
class BatchObjective:
    value: float
    terms: ComposedObjective
    gradients: Gradients
    logits: np.ndarray
    signals: Optional[BatchSignals] = None


@dataclass
class TrainRun:
    """Outcome of one training run."""
    role: ModelRole
    seed: int
    config_digest: str
    params: Parameters
    records: list[EpochRecord] = field(default_factory=list)
    checkpoint_path: Optional[str] = None

    @property
    def final(self) -> EpochRecord:
        return self.records[-1]

    def log_rows(self) -> list[list]:
        return [[getattr(record, column) for column in LOG_HEADER] for record in self.records]


def network_config_for(config: RunConfig, vocab_size: int) -> NetworkConfig:
    return NetworkConfig(
        vocab_size=vocab_size,
        num_classes=config.num_classes(),
        max_len=config.vocab.max_len,
        embed_dim=config.network.embed_dim,
        conv_channels=config.network.conv_channels,
        kernel_size=config.network.kernel_size,
        latent_dim=config.network.latent_dim,
    )


def make_batch(corpus: Corpus, vocab: Vocabulary, max_len: int) -> TokenBatch:
    return TokenBatch.from_sequences(encode_corpus(corpus, vocab, max_len), corpus.label_indices)


def batch_objective(
    params: Parameters,
    batch: TokenBatch,
    loss: LossSettings,
    schedule: TrainSchedule,
    context: Optional[SignalContext] = None,
    detach_reconstruction: bool = False,
    mode: ModelMode = ModelMode.TRAIN,
) -> BatchObjective:
    """
    Composite objective of one mini-batch and its parameter gradients.

    Without a signal context the LatentG term is zero, which is the teacher
    objective base + gamma * MSE. Gradients are those of the batch-mean
    objective.
    """
    output = forward(params, batch.ids, batch.lengths, mode)
    target = reconstruction_target(params, batch.ids, batch.lengths)
    base = base_loss(output.logits, batch.labels, loss)
    reconstruction = mse(output.reconstruction, target)

    signals = None
    latentg_values = np.zeros(len(batch))
    if context is not None:
        signals = compute_batch_signals(
            output.features, batch.sample_ids, batch.labels, context.store, context.gmm, context.distill
        )
        latentg_values = signals.latentg(context.alpha, context.beta)

    terms = compose_objective(base, latentg_values, reconstruction, schedule, loss.gamma, loss.per_sample_composition)
    d_logits = terms.d_logits
    d_latent = None
    if signals is not None:
        d_features = terms.d_latentg[:, None] * signals.latentg_grad(context.alpha, context.beta)
        latent_dim = params.config.latent_dim
        d_latent = d_features[:, :latent_dim]
        d_logits = d_logits + d_features[:, latent_dim:]

    gradients = backward(
        params,
        output,
        d_latent=d_latent,
        d_logits=d_logits,
        d_reconstruction=terms.d_reconstruction,
        detach_reconstruction=detach_reconstruction,
    )
    return BatchObjective(value=terms.value, terms=terms, gradients=gradients, logits=output.logits, signals=signals)


def train_network(
    params: Parameters,
    batch: TokenBatch,
    config: RunConfig,
    role: ModelRole,
    epochs: int,
    seed: int,
    context: Optional[SignalContext] = None,
    on_epoch: Optional[Callable[[int, Parameters], None]] = None,
) -> TrainRun:
    """
    Mini-batch SGD for a fixed number of epochs.

    Batch order is reshuffled every epoch from `seed`; the last partial batch
    is kept. Epoch records hold sample-weighted means of the batch terms.

    Raises:
        DivergenceError: a non-finite objective or gradient (names the epoch)
    """
    n = len(batch)
    if n == 0:
        raise ConfigurationError(f"Cannot train the {role.value} on an empty training set")
    trainer = config.trainer
    rng = np.random.default_rng(seed)
    state = SgdState()
    run = TrainRun(role=role, seed=seed, config_digest=config.digest(), params=params)

    for epoch in range(1, epochs + 1):
        schedule = TrainSchedule(epoch, epochs)
        order = rng.permutation(n)
        sums = {"base": 0.0, "latentg": 0.0, "mse": 0.0, "objective": 0.0}
        correct = 0
        for start in range(0, n, trainer.batch_size):
            rows = order[start:start + trainer.batch_size]
            step = batch_objective(
                params,
                batch.take(rows),
                config.loss,
                schedule,
                context,
                trainer.detach_reconstruction,
            )
            if not np.isfinite(step.value):
                raise DivergenceError(f"{role.value} objective became non-finite at epoch {epoch}")
            try:
                params = sgd_step(
                    params,
                    step.gradients,
                    trainer.lr,
                    state=state,
                    momentum=trainer.momentum,
                    weight_decay=trainer.weight_decay,
                )
            except DivergenceError as e:
                raise DivergenceError(f"{e} at epoch {epoch}") from e

            size = len(rows)
            sums["base"] += step.terms.base * size
            sums["latentg"] += step.terms.latentg * size
            sums["mse"] += step.terms.mse * size
            sums["objective"] += step.value * size
            correct += int((predict_classes(step.logits) == batch.labels[rows]).sum())

        means = {key: value / n for key, value in sums.items()}
        record = EpochRecord(
            epoch=epoch,
            base=means["base"],
            latentg_mean=means["latentg"],
            mse=means["mse"],
            total=total_loss(means["base"], means["latentg"], means["mse"], schedule, config.loss.gamma),
            modulation=1.0 + schedule.factor * means["latentg"],
            objective=means["objective"],
            accuracy=correct / n,
        )
        run.records.append(record)
        logger.info(
            f"[{role.value}] epoch {epoch}/{epochs} base={record.base:.6f} latentg={record.latentg_mean:.6f} "
            f"mse={record.mse:.6f} total={record.total:.6f} acc={record.accuracy:.4f}"
        )
        if on_epoch is not None:
            on_epoch(epoch, params)

    run.params = params
    return run


def initial_params(config: RunConfig, vocab: Vocabulary, seed: Optional[int] = None) -> Parameters:
    """Seeded initialization, optionally with pretrained embedding rows."""
    seed = config.seed if seed is None else seed
    params = init_params(network_config_for(config, len(vocab)), seed=seed)
    if config.network.pretrained_embeddings is not None:
        params = load_text_embeddings(config.network.pretrained_embeddings, vocab, params)
    return params


def train_teacher(batch: TokenBatch, vocab: Vocabulary, config: RunConfig, seed: Optional[int] = None) -> TrainRun:
    """Dual network trained on base loss + gamma * MSE."""
    seed = config.seed if seed is None else seed
    params = initial_params(config, vocab, seed)
    return train_network(params, batch, config, ModelRole.TEACHER, config.trainer.teacher_epochs, seed)


def train_student(
    batch: TokenBatch,
    vocab: Vocabulary,
    config: RunConfig,
    store: TeacherFeatureStore,
    gmm: GmmModel,
    seed: Optional[int] = None,
    on_epoch: Optional[Callable[[int, Parameters], None]] = None,
) -> TrainRun:
    """
    Dual network trained on the full objective with signals from the frozen teacher.

    Starts from the same initialization as the teacher, so alpha = beta = 0
    replays teacher training.

    Raises:
        VocabError: the teacher features were extracted under another vocabulary
        ConfigurationError: latent size differs from the teacher's
    """
    seed = config.seed if seed is None else seed
    if store.vocab_digest and store.vocab_digest != vocab.digest():
        raise VocabError(
            f"Teacher features were extracted with vocabulary {store.vocab_digest}, "
            f"current vocabulary is {vocab.digest()}; rerun train-teacher and algorithm1"
        )
    if store.latent_dim != config.network.latent_dim:
        raise ConfigurationError(
            f"Teacher features have latent_dim {store.latent_dim}, student config has {config.network.latent_dim}"
        )
    context = SignalContext(
        store=store,
        gmm=gmm,
        distill=config.distill,
        alpha=config.loss.alpha,
        beta=config.loss.beta,
    )
    params = initial_params(config, vocab, seed)
    return train_network(
        params, batch, config, ModelRole.STUDENT, config.trainer.student_epochs, seed, context, on_epoch
    )


def evaluate(params: Parameters, batch: TokenBatch, label_names: Sequence[str]) -> MetricsReport:
    """Eval-mode predictions over a batch scored against its labels."""
    features = compute_features(params, batch)
    logits = features[:, params.config.latent_dim:]
    return compute_metrics(batch.labels, predict_classes(logits), label_names)
