from .batch import TokenBatch
from .checkpoint import Checkpoint, decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint
from .embeddings import load_text_embeddings
from .network import (
    ForwardOutput,
    Gradients,
    NetworkConfig,
    Parameters,
    backward,
    feature_vector,
    forward,
    init_params,
    reconstruction_target,
)
from .optim import SgdState, sgd_step

__all__ = [
    "Checkpoint",
    "ForwardOutput",
    "Gradients",
    "NetworkConfig",
    "Parameters",
    "SgdState",
    "TokenBatch",
    "backward",
    "decode_checkpoint",
    "encode_checkpoint",
    "feature_vector",
    "forward",
    "init_params",
    "load_checkpoint",
    "load_text_embeddings",
    "reconstruction_target",
    "save_checkpoint",
    "sgd_step",
]
