"""CSV ingestion of labeled text corpora."""

import csv
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from app.core.exceptions import DuplicateIdError, FormatError, LabelError, SchemaError
from app.services.storage import iter_csv_rows, render_csv
from .models import Corpus, LabelSet, Sample

logger = logging.getLogger(__name__)

SPLIT_TRAIN = "train"
SPLIT_TEST = "test"


@dataclass(frozen=True)
class CsvSchema:
    """Column names of an input CSV."""
    id_column: str = "id"
    text_column: str = "statement"
    label_column: str = "status"

    @property
    def columns(self) -> list[str]:
        return [self.id_column, self.text_column, self.label_column]


def _decode_content(content: bytes, source: Path) -> str:
    """UTF-8 with an optional BOM."""
    try:
        return content.decode("utf-8-sig")
    except UnicodeDecodeError as e:
        raise FormatError(f"{source} is not valid UTF-8 (byte offset {e.start})") from e


def load_csv(path: Path, label_set: LabelSet, schema: Optional[CsvSchema] = None) -> Corpus:
    """
    Load a labeled CSV into an uncleaned Corpus.

    Args:
        path: CSV file with a header row
        label_set: Allowed labels; row labels must match a name exactly
        schema: Column names (defaults to id,statement,status)

    Raises:
        SchemaError: missing file or column, or non-integer id
        FormatError: the file is not valid UTF-8
        LabelError: unknown label, citing the 1-based data row
        DuplicateIdError: repeated id, citing the 1-based data row
    """
    schema = schema or CsvSchema()
    try:
        content = Path(path).read_bytes()
    except OSError as e:
        raise SchemaError(f"Cannot read corpus CSV {path}: {e}") from e

    reader = csv.DictReader(io.StringIO(_decode_content(content, path)))
    headers = reader.fieldnames or []
    missing = [col for col in schema.columns if col not in headers]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {missing}; found {headers}")

    samples: list[Sample] = []
    seen: set[int] = set()
    for row_num, row in enumerate(reader, start=1):
        raw_id = (row.get(schema.id_column) or "").strip()
        try:
            sample_id = int(raw_id)
        except ValueError:
            raise SchemaError(f"Row {row_num}: id {raw_id!r} is not an integer") from None
        if sample_id in seen:
            raise DuplicateIdError(f"Row {row_num}: duplicate id {sample_id}")
        seen.add(sample_id)

        label_name = (row.get(schema.label_column) or "").strip()
        try:
            label = label_set.by_name(label_name)
        except LabelError:
            raise LabelError(
                f"Row {row_num}: unknown label {label_name!r}; expected one of {label_set.names}"
            ) from None

        samples.append(Sample(id=sample_id, raw_text=row.get(schema.text_column) or "", label=label))

    logger.info(f"Loaded {len(samples)} samples from {path}")
    return Corpus(samples=tuple(samples), label_set=label_set)


PREPARED_HEADER = ["id", "statement", "clean", "status", "split"]


def render_prepared(train: Corpus, test: Corpus, config_digest: Optional[str] = None) -> str:
    """CSV text of a cleaned train/test pair, the hand-off between subcommands."""
    rows = []
    for split, corpus in ((SPLIT_TRAIN, train), (SPLIT_TEST, test)):
        for sample in corpus:
            rows.append([sample.id, sample.raw_text, sample.clean_text, sample.label.name, split])
    return render_csv(PREPARED_HEADER, rows, config_digest)


def read_prepared(path: Path, label_set: LabelSet) -> tuple[Corpus, Corpus]:
    """
    Read a prepared corpus back into cleaned (train, test) corpora.

    Raises:
        FormatError: unknown split value or missing columns
        LabelError: label outside the label set
    """
    text = Path(path).read_text(encoding="utf-8")
    parts: dict[str, list[Sample]] = {SPLIT_TRAIN: [], SPLIT_TEST: []}
    for row_num, row in enumerate(iter_csv_rows(text), start=1):
        try:
            split = row["split"]
            sample = Sample(
                id=int(row["id"]),
                raw_text=row["statement"],
                clean_text=row["clean"],
                label=label_set.by_name(row["status"]),
            )
        except KeyError as e:
            raise FormatError(f"{path}: row {row_num} lacks column {e}") from e
        except LabelError as e:
            raise LabelError(f"{path}: row {row_num}: {e}") from e
        if split not in parts:
            raise FormatError(f"{path}: row {row_num} has unknown split {split!r}")
        parts[split].append(sample)

    train = Corpus(tuple(parts[SPLIT_TRAIN]), label_set, cleaned=True)
    test = Corpus(tuple(parts[SPLIT_TEST]), label_set, cleaned=True)
    return train, test
