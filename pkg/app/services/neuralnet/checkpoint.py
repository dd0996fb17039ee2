"""Checkpoint files for network parameters (LGN1 container, float32 blobs)."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from app.core.exceptions import FormatError, ShapeError
from app.services.storage import CHECKPOINT_MAGIC, decode_container, encode_container, write_container
from .network import NetworkConfig, Parameters

logger = logging.getLogger(__name__)

CHECKPOINT_KIND = "network"


@dataclass
class Checkpoint:
    params: Parameters
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def config(self) -> NetworkConfig:
        return self.params.config

    @property
    def labels(self) -> list[str]:
        return list(self.metadata.get("labels", []))

    @property
    def vocab_digest(self) -> Optional[str]:
        return self.metadata.get("vocab_digest")


def encode_checkpoint(params: Parameters, metadata: Optional[dict[str, Any]] = None) -> bytes:
    return encode_container(
        CHECKPOINT_MAGIC,
        CHECKPOINT_KIND,
        params.values,
        dtype="float32",
        header={"config": params.config.to_dict(), "metadata": metadata or {}},
    )


def decode_checkpoint(content: bytes, source: str = "<bytes>", expected: Optional[NetworkConfig] = None) -> Checkpoint:
    """
    Rebuild parameters from checkpoint bytes.

    Raises:
        FormatError: not a network checkpoint, or parameters missing
        ShapeError: blob shapes disagree with the embedded config, or the
            embedded config disagrees with `expected`
    """
    payload = decode_container(content, CHECKPOINT_MAGIC, source)
    if payload.kind != CHECKPOINT_KIND:
        raise FormatError(f"{source}: expected a {CHECKPOINT_KIND} checkpoint, found {payload.kind!r}")
    try:
        config = NetworkConfig.from_dict(payload.header["config"])
    except (KeyError, TypeError) as e:
        raise FormatError(f"{source}: header carries no usable network config: {e}") from e

    if expected is not None and expected != config:
        mismatched = {
            key: (value, getattr(config, key))
            for key, value in expected.to_dict().items()
            if getattr(config, key) != value
        }
        raise ShapeError(f"{source}: checkpoint config differs from expected (expected, found): {mismatched}")

    shapes = config.parameter_shapes()
    missing = set(shapes) - set(payload.arrays)
    if missing:
        raise FormatError(f"{source}: missing parameters {sorted(missing)}")
    values: dict[str, np.ndarray] = {}
    for name, shape in shapes.items():
        array = payload.arrays[name]
        if array.shape != shape:
            raise ShapeError(f"{source}: {name} has shape {array.shape}, config implies {shape}")
        values[name] = array.astype(np.float32)
    return Checkpoint(params=Parameters(config, values), metadata=dict(payload.header.get("metadata", {})))


def save_checkpoint(params: Parameters, path: Path, metadata: Optional[dict[str, Any]] = None) -> None:
    write_container(Path(path), encode_checkpoint(params, metadata))


def load_checkpoint(path: Path, expected: Optional[NetworkConfig] = None) -> Checkpoint:
    payload_bytes = _read(path)
    checkpoint = decode_checkpoint(payload_bytes, source=str(path), expected=expected)
    logger.info(f"Loaded checkpoint {path} ({len(checkpoint.params.values)} arrays)")
    return checkpoint


def _read(path: Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise FormatError(f"Cannot read checkpoint {path}: {e}") from e
