"""Tokenization, vocabulary construction and integer encoding."""

import hashlib
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from app.core.exceptions import FormatError, VocabError
from app.services.corpus import Corpus

logger = logging.getLogger(__name__)

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
PAD = 0
UNK = 1
SPECIALS = (PAD_TOKEN, UNK_TOKEN)


def tokenize(text: str) -> list[str]:
    """Whitespace split of an already cleaned text."""
    return text.split()


@dataclass(frozen=True)
class Vocabulary:
    """Token <-> index maps with PAD=0 and UNK=1."""
    tokens: tuple[str, ...]
    token_to_index: dict[str, int] = field(compare=False, repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        if self.tokens[:2] != SPECIALS:
            raise VocabError("Vocabulary must start with the PAD and UNK specials")
        mapping = {token: index for index, token in enumerate(self.tokens)}
        if len(mapping) != len(self.tokens):
            raise VocabError("Vocabulary tokens must be unique")
        object.__setattr__(self, "token_to_index", mapping)

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "Vocabulary":
        return cls(SPECIALS + tuple(tokens))

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_index

    def index(self, token: str) -> int:
        return self.token_to_index.get(token, UNK)

    def digest(self) -> str:
        return hashlib.sha256("\n".join(self.tokens).encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class TokenSequence:
    """A sample encoded against a vocabulary, padded to max_len."""
    sample_id: int
    indices: np.ndarray
    length: int


def build_vocab(train: Corpus, min_freq: int = 2) -> Vocabulary:
    """
    Vocabulary of training tokens with frequency >= min_freq.

    Ordered by (-frequency, token) so the result is deterministic.

    Raises:
        VocabError: empty corpus or nothing survives the frequency filter
    """
    if len(train) == 0:
        raise VocabError("Cannot build a vocabulary from an empty corpus")
    counts: Counter[str] = Counter()
    for text in train.texts():
        counts.update(tokenize(text))
    kept = [token for token, count in counts.items() if count >= min_freq and token not in SPECIALS]
    if not kept:
        raise VocabError(f"No token reaches min_freq={min_freq}")
    kept.sort(key=lambda token: (-counts[token], token))
    logger.info(f"Built vocabulary of {len(kept)} tokens (+2 specials) from {len(train)} samples")
    return Vocabulary.from_tokens(kept)


def encode(text: str, vocab: Vocabulary, max_len: int, sample_id: int = 0) -> TokenSequence:
    """Map tokens to indices (unknown -> UNK), truncate to max_len, right-pad with PAD."""
    if max_len < 1:
        raise ValueError(f"max_len must be >= 1, got {max_len}")
    ids = [vocab.index(token) for token in tokenize(text)][:max_len]
    indices = np.full(max_len, PAD, dtype=np.int64)
    indices[:len(ids)] = ids
    return TokenSequence(sample_id=sample_id, indices=indices, length=len(ids))


def decode(sequence: TokenSequence, vocab: Vocabulary) -> str:
    return " ".join(vocab.tokens[int(i)] for i in sequence.indices[:sequence.length])


def encode_corpus(corpus: Corpus, vocab: Vocabulary, max_len: int) -> list[TokenSequence]:
    return [encode(text, vocab, max_len, sample_id=sid) for sid, text in zip(corpus.ids, corpus.texts())]


def export_vocab(vocab: Vocabulary, config_digest: Optional[str] = None) -> str:
    """One non-special token per line after an optional digest comment; index = token line number + 2."""
    header = f"# config_digest={config_digest}\n" if config_digest else ""
    return header + "".join(f"{token}\n" for token in vocab.tokens[len(SPECIALS):])


def load_vocab(path: Path) -> Vocabulary:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise FormatError(f"Cannot read vocabulary {path}: {e}") from e
    return Vocabulary.from_tokens(line for line in lines if line and not line.startswith("#"))


def stack_sequences(sequences: Sequence[TokenSequence]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(ids [B, T], lengths [B], sample_ids [B]) arrays from sequences of equal max_len."""
    ids = np.stack([s.indices for s in sequences]) if sequences else np.zeros((0, 0), dtype=np.int64)
    lengths = np.array([s.length for s in sequences], dtype=np.int64)
    sample_ids = np.array([s.sample_id for s in sequences], dtype=np.int64)
    return ids, lengths, sample_ids
