import logging
from collections import Counter

from app.core.exceptions import StatsError
from .models import Corpus, CorpusStats

logger = logging.getLogger(__name__)


def compute_stats(corpus: Corpus) -> CorpusStats:
    """
    Class distribution and word-count histogram.

    Buckets are exact word counts of the cleaned text (raw text before
    cleaning).

    Raises:
        StatsError: empty corpus
    """
    if len(corpus) == 0:
        raise StatsError("Cannot compute statistics of an empty corpus")

    counts = corpus.class_counts()
    class_counts = {corpus.label_set[index].name: count for index, count in counts.items()}
    lengths = Counter(len(text.split()) for text in corpus.texts())
    histogram = {length: lengths[length] for length in sorted(lengths)}
    return CorpusStats(class_counts=class_counts, length_histogram=histogram)


def stats_rows(stats: CorpusStats) -> tuple[list[list], list[list]]:
    """Rows for class_counts.csv (label,count) and length_hist.csv (word_count,count)."""
    class_rows = [[name, count] for name, count in stats.class_counts.items()]
    hist_rows = [[length, count] for length, count in stats.length_histogram.items()]
    return class_rows, hist_rows
