"""Seeded synthetic corpus with class-specific token profiles."""

import logging

import numpy as np

from app.services.storage import render_csv
from .models import Corpus, LabelSet, Sample

logger = logging.getLogger(__name__)

VOCAB_SIZE = 200
EXCLUSIVE_TOKENS = 12
EXCLUSIVE_PROB = 0.5
MIN_WORDS = 3
MAX_WORDS = 30


def token_name(index: int) -> str:
    return f"tok{index:03d}"


def generate_synthetic(n: int, seed: int, label_set: LabelSet) -> Corpus:
    """
    Generate n samples with classes drawn uniformly.

    Class k owns a block of EXCLUSIVE_TOKENS tokens; each word of a document
    is drawn from its class block with probability EXCLUSIVE_PROB and from
    the shared background tokens otherwise. Lengths are uniform in
    [MIN_WORDS, MAX_WORDS].
    """
    num_classes = len(label_set)
    if num_classes * EXCLUSIVE_TOKENS >= VOCAB_SIZE:
        raise ValueError(f"{num_classes} classes do not fit a {VOCAB_SIZE}-token vocabulary")

    rng = np.random.default_rng(seed)
    background = np.arange(num_classes * EXCLUSIVE_TOKENS, VOCAB_SIZE)
    samples = []
    for sample_id in range(1, n + 1):
        class_index = int(rng.integers(num_classes))
        exclusive = np.arange(class_index * EXCLUSIVE_TOKENS, (class_index + 1) * EXCLUSIVE_TOKENS)
        length = int(rng.integers(MIN_WORDS, MAX_WORDS + 1))
        from_class = rng.random(length) < EXCLUSIVE_PROB
        words = [
            token_name(int(rng.choice(exclusive) if own else rng.choice(background)))
            for own in from_class
        ]
        samples.append(Sample(id=sample_id, raw_text=" ".join(words), label=label_set[class_index]))

    logger.info(f"Generated {n} synthetic samples over {num_classes} classes (seed={seed})")
    return Corpus(samples=tuple(samples), label_set=label_set)


def render_corpus_csv(corpus: Corpus, columns: tuple[str, str, str] = ("id", "statement", "status")) -> str:
    """Raw corpus as CSV in the input schema (no digest line, so it loads as input)."""
    rows = [[s.id, s.raw_text, s.label.name] for s in corpus]
    return render_csv(list(columns), rows)
