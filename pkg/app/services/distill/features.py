"""Teacher feature vectors keyed by sample id."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from app.core.exceptions import FormatError, SampleLookupError, VocabError
from app.domain.enums import ModelMode
from app.services.neuralnet import Parameters, TokenBatch, forward
from app.services.storage import CHECKPOINT_MAGIC, decode_container, encode_container, write_container
from app.services.vectorize import Vocabulary

logger = logging.getLogger(__name__)

FEATURES_KIND = "features"
FEATURE_BATCH = 256


@dataclass
class TeacherFeatureStore:
    """Frozen teacher FeatureVectors (latent ‖ logits), one row per sample id."""
    ids: np.ndarray
    matrix: np.ndarray
    latent_dim: int
    checkpoint_digest: str = ""
    vocab_digest: str = ""
    config_digest: str = ""
    _row_of: dict[int, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._row_of = {int(sample_id): row for row, sample_id in enumerate(self.ids)}
        if len(self._row_of) != len(self.ids):
            raise FormatError("Feature store holds duplicate sample ids")

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, sample_id: int) -> bool:
        return int(sample_id) in self._row_of

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[1])

    def lookup(self, sample_ids: Sequence[int]) -> np.ndarray:
        """
        Raises:
            SampleLookupError: naming the first unknown id
        """
        rows = []
        for sample_id in sample_ids:
            row = self._row_of.get(int(sample_id))
            if row is None:
                raise SampleLookupError(f"Sample id {int(sample_id)} has no teacher feature vector")
            rows.append(row)
        return self.matrix[rows]


def compute_features(params: Parameters, batch: TokenBatch, batch_size: int = FEATURE_BATCH) -> np.ndarray:
    """Eval-mode FeatureVectors in fixed-size chunks, so equal parameters give bit-equal rows."""
    chunks = []
    for start in range(0, len(batch), batch_size):
        end = start + batch_size
        output = forward(params, batch.ids[start:end], batch.lengths[start:end], ModelMode.EVAL, keep_cache=False)
        chunks.append(output.features)
    if not chunks:
        return np.zeros((0, params.config.feature_dim), dtype=params.dtype)
    return np.concatenate(chunks, axis=0)


def extract_teacher_features(
    params: Parameters,
    batch: TokenBatch,
    vocab: Vocabulary,
    checkpoint_digest: str = "",
) -> TeacherFeatureStore:
    """
    Raises:
        VocabError: the vocabulary size differs from the teacher's embedding table
    """
    if len(vocab) != params.config.vocab_size:
        raise VocabError(
            f"Vocabulary has {len(vocab)} entries but the teacher was trained on {params.config.vocab_size}"
        )
    matrix = compute_features(params, batch)
    logger.info(f"Extracted {matrix.shape[0]} teacher feature vectors of dimension {matrix.shape[1]}")
    return TeacherFeatureStore(
        ids=batch.sample_ids,
        matrix=matrix,
        latent_dim=params.config.latent_dim,
        checkpoint_digest=checkpoint_digest,
        vocab_digest=vocab.digest(),
    )


def save_feature_store(store: TeacherFeatureStore, path: Path) -> None:
    content = encode_container(
        CHECKPOINT_MAGIC,
        FEATURES_KIND,
        {"ids": store.ids.astype(np.int64), "features": store.matrix},
        dtype="float32",
        header={
            "latent_dim": store.latent_dim,
            "checkpoint_digest": store.checkpoint_digest,
            "vocab_digest": store.vocab_digest,
            "config_digest": store.config_digest,
        },
    )
    write_container(Path(path), content)


def load_feature_store(path: Path) -> TeacherFeatureStore:
    try:
        content = Path(path).read_bytes()
    except OSError as e:
        raise FormatError(f"Cannot read feature store {path}: {e}") from e
    payload = decode_container(content, CHECKPOINT_MAGIC, source=str(path))
    if payload.kind != FEATURES_KIND:
        raise FormatError(f"{path}: expected a {FEATURES_KIND} container, found {payload.kind!r}")
    ids, matrix = payload.arrays.get("ids"), payload.arrays.get("features")
    if ids is None or matrix is None or matrix.ndim != 2 or matrix.shape[0] != ids.shape[0]:
        raise FormatError(f"{path}: ids and features arrays are missing or misaligned")
    return TeacherFeatureStore(
        ids=ids,
        matrix=matrix,
        latent_dim=int(payload.header.get("latent_dim", 0)),
        checkpoint_digest=str(payload.header.get("checkpoint_digest", "")),
        vocab_digest=str(payload.header.get("vocab_digest", "")),
        config_digest=str(payload.header.get("config_digest", "")),
    )
