from dataclasses import dataclass
from typing import Sequence

import numpy as np

from app.services.vectorize import TokenSequence, stack_sequences


@dataclass(frozen=True)
class TokenBatch:
    """Stacked token sequences with their labels."""
    ids: np.ndarray
    lengths: np.ndarray
    sample_ids: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return int(self.ids.shape[0])

    @classmethod
    def from_sequences(cls, sequences: Sequence[TokenSequence], labels: Sequence[int]) -> "TokenBatch":
        if len(sequences) != len(labels):
            raise ValueError(f"{len(sequences)} sequences but {len(labels)} labels")
        ids, lengths, sample_ids = stack_sequences(sequences)
        return cls(ids=ids, lengths=lengths, sample_ids=sample_ids, labels=np.asarray(labels, dtype=np.int64))

    def take(self, rows: np.ndarray) -> "TokenBatch":
        return TokenBatch(
            ids=self.ids[rows],
            lengths=self.lengths[rows],
            sample_ids=self.sample_ids[rows],
            labels=self.labels[rows],
        )
