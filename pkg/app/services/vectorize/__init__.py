from .tfidf import (
    IdfTable,
    TfidfVector,
    count_matrix,
    export_tfidf_csv,
    fit_count_vectorizer,
    tfidf_fit,
    tfidf_matrix,
    tfidf_transform,
    tfidf_triples,
)
from .vocabulary import (
    PAD,
    UNK,
    TokenSequence,
    Vocabulary,
    build_vocab,
    decode,
    encode,
    encode_corpus,
    export_vocab,
    load_vocab,
    stack_sequences,
    tokenize,
)

__all__ = [
    "IdfTable",
    "PAD",
    "TfidfVector",
    "TokenSequence",
    "UNK",
    "Vocabulary",
    "build_vocab",
    "count_matrix",
    "export_tfidf_csv",
    "decode",
    "encode",
    "encode_corpus",
    "export_vocab",
    "fit_count_vectorizer",
    "load_vocab",
    "stack_sequences",
    "tfidf_fit",
    "tfidf_matrix",
    "tfidf_transform",
    "tfidf_triples",
    "tokenize",
]
