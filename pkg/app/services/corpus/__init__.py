from .cleaning import (
    AugmentResult,
    DEFAULT_STOPWORDS,
    augment,
    clean_corpus,
    clean_text,
    identity_hook,
    remove_stopwords,
)
from .loader import CsvSchema, load_csv, read_prepared, render_prepared
from .models import ClassLabel, Corpus, CorpusStats, LabelSet, Sample, SplitSpec
from .splitting import apply_resample, kfold, largest_remainder_quotas, oversample, stratified_split, undersample
from .stats import compute_stats, stats_rows
from .synthetic import generate_synthetic, render_corpus_csv

__all__ = [
    "AugmentResult",
    "ClassLabel",
    "Corpus",
    "CorpusStats",
    "CsvSchema",
    "DEFAULT_STOPWORDS",
    "LabelSet",
    "Sample",
    "SplitSpec",
    "apply_resample",
    "augment",
    "clean_corpus",
    "clean_text",
    "compute_stats",
    "generate_synthetic",
    "identity_hook",
    "kfold",
    "largest_remainder_quotas",
    "load_csv",
    "oversample",
    "read_prepared",
    "remove_stopwords",
    "render_corpus_csv",
    "render_prepared",
    "stats_rows",
    "stratified_split",
    "undersample",
]
