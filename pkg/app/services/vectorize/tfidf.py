"""TF-IDF and raw count vectors for the classical baselines."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from sklearn.feature_extraction.text import CountVectorizer, TfidfVectorizer

from app.core.exceptions import VocabError
from app.services.corpus import Corpus
from app.services.storage import render_csv
from .vocabulary import tokenize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TfidfVector:
    """Sparse (term index, weight) pairs of one document."""
    indices: tuple[int, ...]
    weights: tuple[float, ...]

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.indices, self.weights))

    @property
    def norm(self) -> float:
        return float(np.sqrt(sum(w * w for w in self.weights)))


@dataclass
class IdfTable:
    """
    Fitted smoothed-idf table.

    idf(t) = ln((1 + N) / (1 + df(t))) + 1; document weights are raw counts
    times idf, L2-normalized. Terms unseen at fit time get weight 0. A
    training split without a single token gives a table with no terms.
    """
    vectorizer: Optional[TfidfVectorizer]

    @property
    def terms(self) -> list[str]:
        if self.vectorizer is None:
            return []
        return list(self.vectorizer.get_feature_names_out())

    @property
    def idf(self) -> dict[str, float]:
        if self.vectorizer is None:
            return {}
        return dict(zip(self.terms, (float(v) for v in self.vectorizer.idf_)))

    def __len__(self) -> int:
        return 0 if self.vectorizer is None else len(self.vectorizer.vocabulary_)


def _vectorizer_kwargs() -> dict:
    # Texts are cleaned upstream; the analyzer is the same whitespace split
    # the neural pipeline uses.
    return {"analyzer": tokenize, "lowercase": False}


def tfidf_fit(train: Corpus) -> IdfTable:
    """
    Fit idf weights on the training split only.

    Raises:
        VocabError: empty corpus
    """
    if len(train) == 0:
        raise VocabError("Cannot fit TF-IDF on an empty corpus")
    texts = train.texts()
    if not any(tokenize(text) for text in texts):
        logger.warning(f"None of the {len(train)} training documents has a token; TF-IDF table is empty")
        return IdfTable(vectorizer=None)
    vectorizer = TfidfVectorizer(smooth_idf=True, sublinear_tf=False, norm="l2", **_vectorizer_kwargs())
    vectorizer.fit(texts)
    table = IdfTable(vectorizer=vectorizer)
    logger.info(f"Fitted TF-IDF over {len(train)} documents, {len(table)} terms")
    return table


def tfidf_matrix(texts: Sequence[str], table: IdfTable) -> sparse.csr_matrix:
    if table.vectorizer is None:
        return sparse.csr_matrix((len(texts), 0), dtype=np.float64)
    return sparse.csr_matrix(table.vectorizer.transform(list(texts)), dtype=np.float64)


def tfidf_transform(text: str, table: IdfTable) -> TfidfVector:
    row = tfidf_matrix([text], table).tocoo()
    order = np.argsort(row.col)
    return TfidfVector(
        indices=tuple(int(i) for i in row.col[order]),
        weights=tuple(float(w) for w in row.data[order]),
    )


def tfidf_triples(doc_ids: Sequence[int], matrix: sparse.csr_matrix) -> list[list]:
    """(doc_id, term_index, weight) rows for CSV export."""
    coo = matrix.tocoo()
    rows = sorted(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))
    return [[doc_ids[r], c, f"{w:.12g}"] for r, c, w in rows]


def fit_count_vectorizer(train: Corpus) -> CountVectorizer:
    if len(train) == 0:
        raise VocabError("Cannot fit term counts on an empty corpus")
    vectorizer = CountVectorizer(**_vectorizer_kwargs())
    try:
        vectorizer.fit(train.texts())
    except ValueError as e:
        raise VocabError(f"Count fit failed: {e}") from e
    return vectorizer


def count_matrix(texts: Sequence[str], vectorizer: CountVectorizer) -> sparse.csr_matrix:
    return sparse.csr_matrix(vectorizer.transform(list(texts)), dtype=np.float64)


def export_tfidf_csv(doc_ids: Sequence[int], matrix: sparse.csr_matrix, config_digest: Optional[str] = None) -> str:
    """CSV text of (doc_id, term_index, weight) triples."""
    return render_csv(["doc_id", "term_index", "weight"], tfidf_triples(doc_ids, matrix), config_digest)
