"""Shared fixtures: tiny label sets, corpora and fast run configs."""

from pathlib import Path

import numpy as np
import pytest

from app.core.config import RunConfig, load_run_config
from app.services.corpus import Corpus, LabelSet, Sample, clean_corpus, generate_synthetic
from app.services.neuralnet import NetworkConfig, init_params
from app.services.vectorize import build_vocab

FAST_OVERRIDES = [
    "network.embed_dim=8",
    "network.conv_channels=8",
    "network.latent_dim=6",
    "vocab.max_len=12",
    "vocab.min_freq=1",
    "trainer.teacher_epochs=2",
    "trainer.student_epochs=2",
    "trainer.batch_size=16",
    "trainer.lr=0.05",
    "baseline.epochs=5",
    "baseline.lr_grid=1.0",
    "baseline.l2_grid=0.0",
    "corpus.k_folds=2",
]


def make_corpus(rows: list[tuple[int, str, str]], names: list[str]) -> Corpus:
    labels = LabelSet.from_names(names)
    samples = tuple(Sample(id=i, raw_text=text, label=labels.by_name(label)) for i, text, label in rows)
    return Corpus(samples=samples, label_set=labels)


def write_csv(path: Path, rows: list[tuple], header: str = "id,statement,status") -> Path:
    lines = [header] + [",".join(f'"{v}"' if isinstance(v, str) else str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def binary_labels() -> LabelSet:
    return LabelSet.from_names(["A", "B"])


@pytest.fixture
def fast_config(tmp_path) -> RunConfig:
    return load_run_config(overrides=FAST_OVERRIDES, seed=7, output_dir=tmp_path / "run")


@pytest.fixture
def synthetic_corpus(fast_config) -> Corpus:
    labels = LabelSet.from_names(fast_config.corpus.labels)
    return clean_corpus(generate_synthetic(140, seed=3, label_set=labels))


@pytest.fixture
def synthetic_vocab(synthetic_corpus):
    return build_vocab(synthetic_corpus, min_freq=1)


@pytest.fixture
def tiny_network_config() -> NetworkConfig:
    return NetworkConfig(vocab_size=12, num_classes=3, max_len=6, embed_dim=4, conv_channels=5, kernel_size=3, latent_dim=4)


@pytest.fixture
def tiny_params(tiny_network_config):
    return init_params(tiny_network_config, seed=11)


@pytest.fixture
def token_ids() -> tuple[np.ndarray, np.ndarray]:
    ids = np.array([[2, 3, 4, 5, 0, 0], [6, 7, 0, 0, 0, 0], [8, 9, 10, 11, 2, 3]], dtype=np.int64)
    lengths = np.array([4, 2, 6], dtype=np.int64)
    return ids, lengths
