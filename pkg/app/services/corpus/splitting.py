"""Stratified splitting, k-fold partitioning and resampling."""

import logging
from collections import defaultdict
from dataclasses import replace

import numpy as np

from app.core.exceptions import FoldError, StratificationError
from app.domain.enums import ResampleMode
from .models import Corpus, Sample, SplitSpec

logger = logging.getLogger(__name__)


def _ids_by_class(corpus: Corpus) -> dict[int, list[int]]:
    groups: dict[int, list[int]] = defaultdict(list)
    for sample in corpus:
        groups[sample.label.index].append(sample.id)
    return dict(sorted(groups.items()))


def largest_remainder_quotas(counts: dict[int, int], fraction: float) -> dict[int, int]:
    """
    Per-class quotas whose total is round(fraction * N).

    Each class gets floor(fraction * count); the leftover units go to the
    largest fractional remainders, ties broken by lower class index.
    """
    exact = {c: fraction * n for c, n in counts.items()}
    quotas = {c: int(np.floor(v)) for c, v in exact.items()}
    target = int(round(fraction * sum(counts.values())))
    leftover = target - sum(quotas.values())
    order = sorted(exact, key=lambda c: (-(exact[c] - quotas[c]), c))
    for c in order[:max(leftover, 0)]:
        quotas[c] += 1
    return quotas


def stratified_split(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus]:
    """
    Split into (train, test) preserving class proportions.

    Each class contributes round-by-largest-remainder(test_fraction * count)
    samples to the test part, so every class deviates from its exact
    proportional count by less than one sample. Membership depends only on
    the seed.

    Raises:
        StratificationError: a class with fewer than 2 samples
    """
    groups = _ids_by_class(corpus)
    for class_index, ids in groups.items():
        if len(ids) < 2:
            name = corpus.label_set[class_index].name
            raise StratificationError(f"Class {name!r} has {len(ids)} sample(s); stratification needs at least 2")

    quotas = largest_remainder_quotas({c: len(ids) for c, ids in groups.items()}, spec.test_fraction)
    rng = np.random.default_rng(spec.seed)
    test_ids: set[int] = set()
    for class_index, ids in groups.items():
        shuffled = rng.permutation(np.asarray(sorted(ids)))
        test_ids.update(int(i) for i in shuffled[:quotas[class_index]])

    train = corpus.with_samples(s for s in corpus if s.id not in test_ids)
    test = corpus.with_samples(s for s in corpus if s.id in test_ids)
    logger.info(f"Stratified split: {len(train)} train / {len(test)} test (seed={spec.seed})")
    return train, test


def kfold(corpus: Corpus, k: int, seed: int) -> list[tuple[Corpus, Corpus]]:
    """
    Stratified k-fold partition as (train, validation) pairs.

    Each class's shuffled samples are dealt round-robin across folds, with the
    starting fold rotated by the running total so fold sizes stay balanced.

    Raises:
        FoldError: k < 2 or a class with fewer than k samples
    """
    if k < 2:
        raise FoldError(f"k must be >= 2, got {k}")
    groups = _ids_by_class(corpus)
    for class_index, ids in groups.items():
        if len(ids) < k:
            name = corpus.label_set[class_index].name
            raise FoldError(f"Class {name!r} has {len(ids)} sample(s), fewer than k={k}")

    rng = np.random.default_rng(seed)
    fold_ids: list[set[int]] = [set() for _ in range(k)]
    offset = 0
    for ids in groups.values():
        shuffled = rng.permutation(np.asarray(sorted(ids)))
        for position, sample_id in enumerate(shuffled):
            fold_ids[(offset + position) % k].add(int(sample_id))
        offset = (offset + len(shuffled)) % k

    folds = []
    for validation_ids in fold_ids:
        train = corpus.with_samples(s for s in corpus if s.id not in validation_ids)
        validation = corpus.with_samples(s for s in corpus if s.id in validation_ids)
        folds.append((train, validation))
    return folds


def undersample(corpus: Corpus, seed: int) -> Corpus:
    """Drop samples at random until every present class has the minority count."""
    groups = _ids_by_class(corpus)
    if not groups:
        return corpus
    target = min(len(ids) for ids in groups.values())
    rng = np.random.default_rng(seed)
    keep: set[int] = set()
    for ids in groups.values():
        chosen = rng.choice(np.asarray(sorted(ids)), size=target, replace=False)
        keep.update(int(i) for i in chosen)
    logger.info(f"Undersampled {len(corpus)} -> {len(keep)} samples")
    return corpus.subset(keep)


def oversample(corpus: Corpus, seed: int) -> Corpus:
    """Duplicate random samples (fresh ids) until every class has the majority count."""
    groups = _ids_by_class(corpus)
    if not groups:
        return corpus
    target = max(len(ids) for ids in groups.values())
    by_id = {s.id: s for s in corpus}
    rng = np.random.default_rng(seed)
    next_id = corpus.next_id()
    extra: list[Sample] = []
    for ids in groups.values():
        needed = target - len(ids)
        if needed <= 0:
            continue
        for source_id in rng.choice(np.asarray(sorted(ids)), size=needed, replace=True):
            extra.append(replace(by_id[int(source_id)], id=next_id))
            next_id += 1
    logger.info(f"Oversampled {len(corpus)} -> {len(corpus) + len(extra)} samples")
    return corpus.with_samples(corpus.samples + tuple(extra))


def apply_resample(corpus: Corpus, mode: ResampleMode, seed: int) -> Corpus:
    mode = ResampleMode(mode)
    if mode is ResampleMode.UNDERSAMPLE:
        return undersample(corpus, seed)
    if mode is ResampleMode.OVERSAMPLE:
        return oversample(corpus, seed)
    return corpus
