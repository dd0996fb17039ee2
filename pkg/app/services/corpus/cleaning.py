"""Text cleaning and augmentation."""

import logging
import re
import unicodedata
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

from sklearn.feature_extraction.text import ENGLISH_STOP_WORDS

from .models import Corpus, Sample

logger = logging.getLogger(__name__)

BRACKET_PATTERN = re.compile(r"\[[^\]]*\]")
URL_PATTERN = re.compile(r"(?:https?://|www\.)\S*", re.IGNORECASE)
HTML_TAG_PATTERN = re.compile(r"<[^>]*>")

DEFAULT_STOPWORDS = frozenset(ENGLISH_STOP_WORDS)

TextHook = Callable[[str], str]


def _strip_symbols(text: str) -> str:
    """Whitespace to one space; punctuation, symbols and control characters dropped."""
    out = []
    for ch in text:
        if ch.isspace():
            out.append(" ")
        elif unicodedata.category(ch)[0] in ("P", "S", "C"):
            continue
        else:
            out.append(ch)
    return "".join(out)


def clean_text(raw: str) -> str:
    """
    Normalize a raw statement.

    Lowercases, then removes `[...]` spans, URLs (http://, https://, www.),
    HTML tags, punctuation/symbols (Unicode P and S categories) and newlines,
    collapses whitespace and trims. Digits are kept. The function is
    idempotent: its output contains no character any rule could remove.
    """
    text = raw.lower()
    text = BRACKET_PATTERN.sub(" ", text)
    text = URL_PATTERN.sub(" ", text)
    text = HTML_TAG_PATTERN.sub("", text)
    text = _strip_symbols(text)
    return " ".join(text.split())


def remove_stopwords(text: str, stoplist: Iterable[str] = DEFAULT_STOPWORDS) -> str:
    stop = stoplist if isinstance(stoplist, (set, frozenset)) else frozenset(stoplist)
    return " ".join(token for token in text.split() if token not in stop)


def clean_corpus(corpus: Corpus, stoplist: Optional[Iterable[str]] = None) -> Corpus:
    """Populate clean_text for every sample; optional stop-word removal."""
    stop = frozenset(stoplist) if stoplist is not None else None
    samples = []
    for sample in corpus:
        cleaned = clean_text(sample.raw_text)
        if stop is not None:
            cleaned = remove_stopwords(cleaned, stop)
        samples.append(replace(sample, clean_text=cleaned))
    return corpus.with_samples(samples, cleaned=True)


def identity_hook(text: str) -> str:
    return text


@dataclass
class AugmentResult:
    """Result of running an augmentation hook over a corpus."""
    corpus: Corpus
    added: int = 0
    suppressed: int = 0
    failures: list[str] = field(default_factory=list)


def augment(corpus: Corpus, hook: TextHook = identity_hook) -> AugmentResult:
    """
    Add at most one transformed copy of every sample.

    The hook sees the cleaned text; its output is re-cleaned. Copies whose
    cleaned text already exists in the corpus (or among earlier copies) are
    suppressed. A hook failure skips that sample and is recorded.
    """
    if not corpus.cleaned:
        corpus = clean_corpus(corpus)

    seen = {sample.clean_text for sample in corpus}
    next_id = corpus.next_id()
    extra: list[Sample] = []
    suppressed = 0
    failures: list[str] = []

    for sample in corpus:
        try:
            transformed = hook(sample.clean_text)
        except Exception as e:
            failures.append(f"Sample {sample.id}: {e}")
            continue
        cleaned = clean_text(transformed)
        if cleaned in seen:
            suppressed += 1
            continue
        seen.add(cleaned)
        extra.append(Sample(id=next_id, raw_text=transformed, clean_text=cleaned, label=sample.label))
        next_id += 1

    if failures:
        logger.warning(f"Augmentation hook failed on {len(failures)} sample(s)")
    logger.info(f"Augmentation added {len(extra)} sample(s), suppressed {suppressed} duplicate(s)")
    return AugmentResult(
        corpus=corpus.with_samples(corpus.samples + tuple(extra)),
        added=len(extra),
        suppressed=suppressed,
        failures=failures,
    )
