"""Corpus domain types."""

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional, Sequence

from app.core.exceptions import DuplicateIdError, LabelError


@dataclass(frozen=True)
class ClassLabel:
    """A class of the label set."""
    index: int
    name: str


@dataclass(frozen=True)
class LabelSet:
    """Ordered set of K >= 2 class labels."""
    labels: tuple[ClassLabel, ...]

    def __post_init__(self) -> None:
        if len(self.labels) < 2:
            raise LabelError(f"A label set needs at least 2 classes, got {len(self.labels)}")
        names = [label.name for label in self.labels]
        if len(set(names)) != len(names):
            raise LabelError(f"Duplicate label names in {names}")
        if [label.index for label in self.labels] != list(range(len(self.labels))):
            raise LabelError("Label indices must be 0..K-1 in order")

    @classmethod
    def from_names(cls, names: Sequence[str]) -> "LabelSet":
        return cls(tuple(ClassLabel(index=i, name=name) for i, name in enumerate(names)))

    @property
    def names(self) -> list[str]:
        return [label.name for label in self.labels]

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, index: int) -> ClassLabel:
        return self.labels[index]

    def by_name(self, name: str) -> ClassLabel:
        for label in self.labels:
            if label.name == name:
                return label
        raise LabelError(f"Unknown label {name!r}; expected one of {self.names}")


@dataclass(frozen=True)
class Sample:
    """One labeled text."""
    id: int
    raw_text: str
    label: ClassLabel
    clean_text: str = ""


@dataclass(frozen=True)
class Corpus:
    """
    Immutable collection of samples over one label set.

    `cleaned` records whether clean_text has been populated, since an empty
    clean_text is also a legitimate cleaning result.
    """
    samples: tuple[Sample, ...]
    label_set: LabelSet
    cleaned: bool = False

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for sample in self.samples:
            if sample.id in seen:
                raise DuplicateIdError(f"Duplicate sample id {sample.id}")
            seen.add(sample.id)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[Sample]:
        return iter(self.samples)

    @property
    def ids(self) -> list[int]:
        return [sample.id for sample in self.samples]

    @property
    def label_indices(self) -> list[int]:
        return [sample.label.index for sample in self.samples]

    def texts(self) -> list[str]:
        """Clean texts once cleaned, raw texts before."""
        if self.cleaned:
            return [sample.clean_text for sample in self.samples]
        return [sample.raw_text for sample in self.samples]

    def class_counts(self) -> dict[int, int]:
        counts = Counter(self.label_indices)
        return {label.index: counts.get(label.index, 0) for label in self.label_set.labels}

    def with_samples(self, samples: Iterable[Sample], cleaned: Optional[bool] = None) -> "Corpus":
        return replace(
            self,
            samples=tuple(samples),
            cleaned=self.cleaned if cleaned is None else cleaned,
        )

    def subset(self, ids: Iterable[int]) -> "Corpus":
        """Samples whose id is in `ids`, in corpus order."""
        wanted = set(ids)
        return self.with_samples(s for s in self.samples if s.id in wanted)

    def next_id(self) -> int:
        return max(self.ids, default=0) + 1


@dataclass(frozen=True)
class SplitSpec:
    """Parameters of a stratified train/test split and optional k-fold."""
    test_fraction: float
    seed: int
    k_folds: Optional[int] = None

    def __post_init__(self) -> None:
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.k_folds is not None and self.k_folds < 2:
            raise ValueError(f"k_folds must be >= 2, got {self.k_folds}")


@dataclass
class CorpusStats:
    """Class distribution and word-count histogram of a corpus."""
    class_counts: dict[str, int]
    length_histogram: dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.class_counts.values())
