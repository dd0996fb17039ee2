from .container import (
    CHECKPOINT_MAGIC,
    GMM_MAGIC,
    ContainerPayload,
    decode_container,
    encode_container,
    read_container,
    write_container,
)
from .local_storage import (
    LocalArtifactStore,
    StoredFile,
    file_digest,
    iter_csv_rows,
    read_config_digest,
    render_csv,
)

__all__ = [
    "CHECKPOINT_MAGIC",
    "GMM_MAGIC",
    "ContainerPayload",
    "LocalArtifactStore",
    "StoredFile",
    "decode_container",
    "encode_container",
    "file_digest",
    "iter_csv_rows",
    "read_config_digest",
    "read_container",
    "render_csv",
    "write_container",
]
