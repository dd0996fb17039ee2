"""
Binary container shared by checkpoints, feature stores and GMMs.

Layout: 4-byte magic, little-endian uint32 header length, UTF-8 JSON header,
then raw little-endian array blobs in manifest order. The header manifest
lists each array's name, shape, dtype and byte offset relative to the start
of the blob section.
"""

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from app.core.exceptions import FormatError

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"LGN1"
GMM_MAGIC = b"LGM1"
FORMAT_VERSION = 1

_DTYPES = {"float32": np.dtype("<f4"), "float64": np.dtype("<f8"), "int64": np.dtype("<i8")}


@dataclass
class ContainerPayload:
    """Decoded contents of a container file."""
    kind: str
    header: dict[str, Any]
    arrays: dict[str, np.ndarray] = field(default_factory=dict)


def encode_container(
    magic: bytes,
    kind: str,
    arrays: Mapping[str, np.ndarray],
    dtype: str,
    header: Mapping[str, Any],
) -> bytes:
    """Serialize named arrays plus a JSON header into container bytes."""
    if dtype not in _DTYPES:
        raise FormatError(f"Unsupported container dtype {dtype}")
    manifest = []
    blobs = []
    offset = 0
    for name, array in arrays.items():
        # Integer arrays (ids) keep their own dtype; reals use the container dtype.
        target = _DTYPES["int64"] if np.issubdtype(np.asarray(array).dtype, np.integer) else _DTYPES[dtype]
        blob = np.ascontiguousarray(array, dtype=target).tobytes()
        manifest.append({
            "name": name,
            "shape": list(np.shape(array)),
            "dtype": "int64" if target == _DTYPES["int64"] else dtype,
            "offset": offset,
        })
        blobs.append(blob)
        offset += len(blob)

    full_header = {"format_version": FORMAT_VERSION, "kind": kind, **header, "manifest": manifest}
    header_bytes = json.dumps(full_header, sort_keys=True).encode("utf-8")
    return magic + struct.pack("<I", len(header_bytes)) + header_bytes + b"".join(blobs)


def decode_container(content: bytes, magic: bytes, source: str = "<bytes>") -> ContainerPayload:
    """
    Parse container bytes.

    Raises:
        FormatError: wrong magic, unsupported version, truncated header or blobs
    """
    if len(content) < 8 or content[:4] != magic:
        raise FormatError(f"{source}: not a {magic.decode()} container")
    (header_len,) = struct.unpack("<I", content[4:8])
    if 8 + header_len > len(content):
        raise FormatError(f"{source}: truncated header")
    try:
        header = json.loads(content[8:8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"{source}: unreadable header: {e}") from e
    if header.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"{source}: unsupported format version {header.get('format_version')}")

    blob_start = 8 + header_len
    blob_section = len(content) - blob_start
    arrays: dict[str, np.ndarray] = {}
    expected_end = 0
    for entry in header.get("manifest", []):
        dtype = _DTYPES.get(entry.get("dtype", ""))
        if dtype is None:
            raise FormatError(f"{source}: unknown dtype for {entry.get('name')}")
        shape = tuple(int(d) for d in entry["shape"])
        size = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        start = int(entry["offset"])
        if start != expected_end or start + size > blob_section:
            raise FormatError(f"{source}: blob for {entry['name']} is truncated or misplaced")
        raw = content[blob_start + start:blob_start + start + size]
        arrays[entry["name"]] = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
        expected_end = start + size
    if expected_end != blob_section:
        raise FormatError(f"{source}: {blob_section - expected_end} unexpected trailing bytes")

    return ContainerPayload(kind=header.get("kind", ""), header=header, arrays=arrays)


def write_container(path: Path, content: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(content)
    logger.info(f"Wrote container {path} ({len(content)} bytes)")


def read_container(path: Path, magic: bytes) -> ContainerPayload:
    path = Path(path)
    try:
        content = path.read_bytes()
    except OSError as e:
        raise FormatError(f"Cannot read {path}: {e}") from e
    return decode_container(content, magic, source=str(path))
