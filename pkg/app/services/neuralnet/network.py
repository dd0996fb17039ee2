"""The dual network: CNN backbone, latent projection, classification and reconstruction decoders."""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np

from app.core.exceptions import ConfigurationError, DivergenceError, StateError
from app.domain.enums import ModelMode
from . import layers

logger = logging.getLogger(__name__)

BLOCKS = ("1", "2")
RUNNING_STATS = tuple(f"bn{b}.{stat}" for b in BLOCKS for stat in ("running_mean", "running_var"))


@dataclass(frozen=True)
class NetworkConfig:
    """Dimensions of a dual network."""
    vocab_size: int
    num_classes: int
    max_len: int
    embed_dim: int = 100
    conv_channels: int = 128
    kernel_size: int = 3
    latent_dim: int = 64

    def __post_init__(self) -> None:
        for name, value in asdict(self).items():
            if not isinstance(value, int) or value < 1:
                raise ConfigurationError(f"NetworkConfig.{name} must be an integer >= 1, got {value!r}")
        if self.num_classes < 2:
            raise ConfigurationError(f"num_classes must be >= 2, got {self.num_classes}")

    @property
    def feature_dim(self) -> int:
        return self.latent_dim + self.num_classes

    def to_dict(self) -> dict[str, int]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "NetworkConfig":
        return cls(**{k: int(v) for k, v in data.items()})

    def parameter_shapes(self) -> dict[str, tuple[int, ...]]:
        e, c, k, latent = self.embed_dim, self.conv_channels, self.kernel_size, self.latent_dim
        return {
            "embedding.weight": (self.vocab_size, e),
            "conv1.weight": (k, e, c),
            "conv1.bias": (c,),
            "bn1.gamma": (c,),
            "bn1.beta": (c,),
            "bn1.running_mean": (c,),
            "bn1.running_var": (c,),
            "conv2.weight": (k, c, c),
            "conv2.bias": (c,),
            "bn2.gamma": (c,),
            "bn2.beta": (c,),
            "bn2.running_mean": (c,),
            "bn2.running_var": (c,),
            "latent.weight": (c, latent),
            "latent.bias": (latent,),
            "classifier.weight": (latent, self.num_classes),
            "classifier.bias": (self.num_classes,),
            "reconstructor.weight": (latent, e),
            "reconstructor.bias": (e,),
        }


@dataclass
class Parameters:
    """Named parameter arrays of one network plus its config."""
    config: NetworkConfig
    values: dict[str, np.ndarray]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]

    @property
    def dtype(self) -> np.dtype:
        return self.values["embedding.weight"].dtype

    @property
    def trainable_names(self) -> list[str]:
        return [name for name in self.values if name not in RUNNING_STATS]

    def copy(self) -> "Parameters":
        return Parameters(self.config, {name: value.copy() for name, value in self.values.items()})

    def astype(self, dtype: Any) -> "Parameters":
        return Parameters(self.config, {name: value.astype(dtype) for name, value in self.values.items()})

    def check_finite(self) -> None:
        for name, value in self.values.items():
            if not np.all(np.isfinite(value)):
                raise DivergenceError(f"Parameter {name} is no longer finite")


def init_params(config: NetworkConfig, seed: int, dtype: Any = np.float32) -> Parameters:
    """
    Seeded initialization.

    Embeddings uniform(-0.05, 0.05); conv and linear weights normal with
    Kaiming fan-in scale sqrt(2 / fan_in); biases 0; batch-norm scale 1,
    shift 0, running mean 0, running variance 1.
    """
    rng = np.random.default_rng(seed)
    shapes = config.parameter_shapes()
    values: dict[str, np.ndarray] = {}
    for name, shape in shapes.items():
        if name == "embedding.weight":
            value = rng.uniform(-0.05, 0.05, size=shape)
        elif name.endswith(".weight"):
            fan_in = int(np.prod(shape[:-1]))
            value = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)
        elif name.endswith(".gamma") or name.endswith(".running_var"):
            value = np.ones(shape)
        else:
            value = np.zeros(shape)
        values[name] = value.astype(dtype)
    return Parameters(config, values)


@dataclass
class ForwardCache:
    """Intermediate activations kept for backward."""
    ids: np.ndarray
    lengths: np.ndarray
    conv: dict[str, layers.ConvCache] = field(default_factory=dict)
    bn: dict[str, layers.BatchNormCache] = field(default_factory=dict)
    relu: dict[str, np.ndarray] = field(default_factory=dict)
    pool_argmax: Optional[np.ndarray] = None
    time_mask: Optional[np.ndarray] = None
    pooled: Optional[np.ndarray] = None
    latent: Optional[np.ndarray] = None


@dataclass
class ForwardOutput:
    latent: np.ndarray
    logits: np.ndarray
    reconstruction: np.ndarray
    cache: Optional[ForwardCache] = None
    batch_stats: dict[str, layers.BatchStats] = field(default_factory=dict)

    @property
    def features(self) -> np.ndarray:
        return feature_vector(self.latent, self.logits)


@dataclass
class Gradients:
    """Parameter gradients plus the batch-norm statistics of the batch they came from."""
    values: dict[str, np.ndarray]
    batch_stats: dict[str, layers.BatchStats] = field(default_factory=dict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]


def feature_vector(latent: np.ndarray, logits: np.ndarray) -> np.ndarray:
    """latent ‖ logits along the last axis."""
    return np.concatenate([latent, logits], axis=-1)


def _check_batch(params: Parameters, ids: np.ndarray, lengths: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ids = np.asarray(ids)
    lengths = np.asarray(lengths)
    if ids.ndim == 1:
        ids = ids[None, :]
        lengths = np.atleast_1d(lengths)
    if ids.ndim != 2 or ids.shape[1] < 1:
        raise ConfigurationError(f"Token ids must be [batch, time], got shape {ids.shape}")
    if lengths.shape != (ids.shape[0],):
        raise ConfigurationError(f"Expected {ids.shape[0]} lengths, got shape {lengths.shape}")
    if ids.size and (ids.min() < 0 or ids.max() >= params.config.vocab_size):
        raise ConfigurationError(
            f"Token ids outside vocabulary of size {params.config.vocab_size}; "
            "sequence was encoded against a different vocabulary"
        )
    return ids, lengths


def forward(
    params: Parameters,
    ids: np.ndarray,
    lengths: np.ndarray,
    mode: ModelMode = ModelMode.EVAL,
    keep_cache: bool = True,
) -> ForwardOutput:
    """
    Embedding -> (conv -> batch-norm -> ReLU) x2 -> masked global max-pool
    -> latent projection -> classification / reconstruction decoders.

    Args:
        ids: [B, T] token indices (a single [T] sequence is promoted)
        lengths: [B] unpadded lengths
        mode: train uses batch statistics; eval uses running statistics
        keep_cache: keep activations for backward

    Raises:
        ConfigurationError: malformed ids or indices outside the vocabulary
    """
    ids, lengths = _check_batch(params, ids, lengths)
    training = ModelMode(mode) is ModelMode.TRAIN
    cache = ForwardCache(ids=ids, lengths=lengths)
    batch_stats: dict[str, layers.BatchStats] = {}

    # Positions past max(length, 1) are zeroed at every stage, so the
    # convolutions see trailing PAD exactly like their own zero padding.
    mask = layers.time_mask(lengths, ids.shape[1], params.dtype)
    cache.time_mask = mask
    h = layers.embedding_forward(params["embedding.weight"], ids) * mask
    for block in BLOCKS:
        h, cache.conv[block] = layers.conv1d_forward(h, params[f"conv{block}.weight"], params[f"conv{block}.bias"])
        h, cache.bn[block], stats = layers.batchnorm_forward(
            h,
            params[f"bn{block}.gamma"],
            params[f"bn{block}.beta"],
            params[f"bn{block}.running_mean"],
            params[f"bn{block}.running_var"],
            training,
        )
        if stats is not None:
            batch_stats[f"bn{block}"] = stats
        h, cache.relu[block] = layers.relu_forward(h)
        h = h * mask

    pooled, cache.pool_argmax = layers.masked_max_pool_forward(h, lengths)
    latent = layers.linear_forward(pooled, params["latent.weight"], params["latent.bias"])
    logits = layers.linear_forward(latent, params["classifier.weight"], params["classifier.bias"])
    reconstruction = layers.linear_forward(latent, params["reconstructor.weight"], params["reconstructor.bias"])
    cache.pooled, cache.latent = pooled, latent

    return ForwardOutput(
        latent=latent,
        logits=logits,
        reconstruction=reconstruction,
        cache=cache if keep_cache else None,
        batch_stats=batch_stats,
    )


def reconstruction_target(params: Parameters, ids: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """
    Mean embedding of the first `length` tokens; zero vector when length is 0.

    The objective treats the result as a constant target: no gradient flows
    back into the embedding table through it.
    """
    ids, lengths = _check_batch(params, ids, lengths)
    embedded = params["embedding.weight"][ids]
    mask = (np.arange(ids.shape[1])[None, :] < lengths[:, None]).astype(embedded.dtype)
    totals = (embedded * mask[:, :, None]).sum(axis=1)
    counts = np.maximum(lengths, 1).astype(embedded.dtype)[:, None]
    return totals / counts


def backward(
    params: Parameters,
    output: ForwardOutput,
    d_latent: Optional[np.ndarray] = None,
    d_logits: Optional[np.ndarray] = None,
    d_reconstruction: Optional[np.ndarray] = None,
    detach_reconstruction: bool = False,
) -> Gradients:
    """
    Gradients of a scalar loss given its gradients w.r.t. the three outputs.

    d_latent is any gradient reaching the latent vector directly (e.g. through
    a feature vector); decoder contributions are added here. With
    detach_reconstruction the reconstruction decoder still receives its own
    gradients but passes nothing back into the latent vector.

    Raises:
        StateError: the output carries no forward cache
    """
    cache = output.cache
    if cache is None or cache.latent is None or cache.pool_argmax is None or cache.time_mask is None:
        raise StateError("backward() needs a forward pass run with keep_cache=True")

    dtype = params.dtype
    batch = cache.ids.shape[0]
    zeros = lambda width: np.zeros((batch, width), dtype=dtype)  # noqa: E731
    d_logits = zeros(params.config.num_classes) if d_logits is None else np.asarray(d_logits, dtype=dtype)
    d_reconstruction = (
        zeros(params.config.embed_dim) if d_reconstruction is None else np.asarray(d_reconstruction, dtype=dtype)
    )
    d_latent_total = zeros(params.config.latent_dim) if d_latent is None else np.asarray(d_latent, dtype=dtype).copy()

    grads: dict[str, np.ndarray] = {}
    d_from_logits, grads["classifier.weight"], grads["classifier.bias"] = layers.linear_backward(
        d_logits, cache.latent, params["classifier.weight"]
    )
    d_from_recon, grads["reconstructor.weight"], grads["reconstructor.bias"] = layers.linear_backward(
        d_reconstruction, cache.latent, params["reconstructor.weight"]
    )
    d_latent_total += d_from_logits
    if not detach_reconstruction:
        d_latent_total += d_from_recon

    d_pooled, grads["latent.weight"], grads["latent.bias"] = layers.linear_backward(
        d_latent_total, cache.pooled, params["latent.weight"]
    )
    d_h = layers.masked_max_pool_backward(d_pooled, cache.pool_argmax, cache.ids.shape[1])

    for block in reversed(BLOCKS):
        d_h = layers.relu_backward(d_h * cache.time_mask, cache.relu[block])
        d_h, grads[f"bn{block}.gamma"], grads[f"bn{block}.beta"] = layers.batchnorm_backward(
            d_h, params[f"bn{block}.gamma"], cache.bn[block]
        )
        d_h, grads[f"conv{block}.weight"], grads[f"conv{block}.bias"] = layers.conv1d_backward(
            d_h, params[f"conv{block}.weight"], cache.conv[block]
        )

    grads["embedding.weight"] = layers.embedding_backward(d_h * cache.time_mask, cache.ids, params.config.vocab_size)
    ordered = {name: grads[name] for name in params.trainable_names}
    return Gradients(values=ordered, batch_stats=dict(output.batch_stats))
