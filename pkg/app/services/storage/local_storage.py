import csv
import hashlib
import io
import itertools
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional, Sequence

from pydantic import BaseModel

from app.core.exceptions import MissingArtifactError

logger = logging.getLogger(__name__)

DIGEST_PREFIX = "# config_digest="


@dataclass
class StoredFile:
    """Represents an artifact written to the run directory."""
    key: str
    path: Path
    content_hash: str
    size: int


class LocalArtifactStore:
    """
    Run-directory storage for pipeline artifacts.

    Every text artifact carries the config digest of the run that wrote it:
    JSON reports as a `config_digest` field, CSV files as a leading
    `# config_digest=` comment line.
    """

    def __init__(self, root: Path, config_digest: str):
        self.root = Path(root)
        self.config_digest = config_digest
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, key: str) -> Path:
        return self.root / key

    def exists(self, key: str) -> bool:
        return self.path(key).exists()

    def require(self, key: str, producer: str) -> Path:
        """
        Return the path of an artifact a previous subcommand must have written.

        Raises:
            MissingArtifactError: naming the subcommand that produces it
        """
        path = self.path(key)
        if not path.exists():
            raise MissingArtifactError(key, producer)
        return path

    def write_bytes(self, key: str, content: bytes) -> StoredFile:
        path = self.path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(content)
        stored = StoredFile(
            key=key,
            path=path,
            content_hash=hashlib.sha256(content).hexdigest(),
            size=len(content),
        )
        logger.info(f"Wrote {key} ({stored.size} bytes)")
        return stored

    def write_text(self, key: str, text: str) -> StoredFile:
        return self.write_bytes(key, text.encode("utf-8"))

    def write_json(self, key: str, report: BaseModel | dict[str, Any]) -> StoredFile:
        data = report.model_dump(mode="json") if isinstance(report, BaseModel) else dict(report)
        if data.get("config_digest") is None:
            data["config_digest"] = self.config_digest
        return self.write_text(key, json.dumps(data, indent=2, sort_keys=True) + "\n")

    def write_csv(self, key: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> StoredFile:
        return self.write_text(key, render_csv(header, rows, self.config_digest))

    def read_json(self, key: str, producer: str) -> dict[str, Any]:
        return json.loads(self.require(key, producer).read_text(encoding="utf-8"))


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], config_digest: Optional[str] = None) -> str:
    buffer = io.StringIO()
    if config_digest:
        buffer.write(f"{DIGEST_PREFIX}{config_digest}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def iter_csv_rows(text: str) -> Iterator[dict[str, str]]:
    """DictReader over CSV text, skipping the leading `#` comment lines."""
    lines = itertools.dropwhile(lambda line: line.startswith("#"), io.StringIO(text))
    yield from csv.DictReader(lines)


def read_config_digest(path: Path) -> Optional[str]:
    with open(path, encoding="utf-8") as f:
        first = f.readline().strip()
    if first.startswith(DIGEST_PREFIX):
        return first[len(DIGEST_PREFIX):]
    return None


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
