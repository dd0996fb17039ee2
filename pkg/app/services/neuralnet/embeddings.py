"""Optional initialization of the embedding table from a text embedding file."""

import logging
from pathlib import Path

import numpy as np

from app.core.exceptions import FormatError, ShapeError
from app.services.vectorize import Vocabulary
from .network import Parameters

logger = logging.getLogger(__name__)


def load_text_embeddings(path: Path, vocab: Vocabulary, params: Parameters) -> Parameters:
    """
    Copy vectors for known tokens into the embedding table.

    The file holds one token per line followed by embed_dim floats, all
    whitespace-separated. Tokens absent from the file keep their random rows;
    tokens absent from the vocabulary are skipped.

    Raises:
        FormatError: unreadable file or non-numeric values
        ShapeError: a vector length differs from embed_dim
    """
    embed_dim = params.config.embed_dim
    if len(vocab) != params.config.vocab_size:
        raise ShapeError(f"Vocabulary has {len(vocab)} entries, network expects {params.config.vocab_size}")
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise FormatError(f"Cannot read embeddings {path}: {e}") from e

    table = params["embedding.weight"].copy()
    matched = 0
    for line_number, line in enumerate(lines, start=1):
        parts = line.rstrip().split(" ")
        if len(parts) < 2:
            continue
        token, raw = parts[0], parts[1:]
        if len(raw) != embed_dim:
            raise ShapeError(f"{path}:{line_number}: vector for {token!r} has {len(raw)} values, expected {embed_dim}")
        if token not in vocab:
            continue
        try:
            table[vocab.index(token)] = np.asarray(raw, dtype=np.float64)
        except ValueError as e:
            raise FormatError(f"{path}:{line_number}: non-numeric value in vector for {token!r}") from e
        matched += 1

    logger.info(f"Initialized {matched}/{len(vocab) - 2} vocabulary rows from {path}")
    values = dict(params.values)
    values["embedding.weight"] = table.astype(params.dtype)
    return Parameters(params.config, values)
