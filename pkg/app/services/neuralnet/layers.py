"""
Forward/backward pairs for the layer types of the dual network.

Activations are laid out [batch, time, channels]. Every forward returns what
its backward needs; backward functions return gradients with respect to the
layer input first, then the layer parameters.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

BN_EPS = 1e-5


def embedding_forward(weight: np.ndarray, ids: np.ndarray) -> np.ndarray:
    return weight[ids]


def embedding_backward(d_out: np.ndarray, ids: np.ndarray, vocab_size: int) -> np.ndarray:
    grad = np.zeros((vocab_size, d_out.shape[-1]), dtype=d_out.dtype)
    np.add.at(grad, ids.reshape(-1), d_out.reshape(-1, d_out.shape[-1]))
    return grad


@dataclass
class ConvCache:
    cols: np.ndarray
    input_shape: tuple[int, int, int]
    left_pad: int


def conv1d_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> tuple[np.ndarray, ConvCache]:
    """
    Same-padded 1-d convolution over time.

    weight is [kernel, in_channels, out_channels]; for even kernels the extra
    pad goes on the right.
    """
    batch, steps, in_channels = x.shape
    kernel, _, out_channels = weight.shape
    left = (kernel - 1) // 2
    padded = np.pad(x, ((0, 0), (left, kernel - 1 - left), (0, 0)))
    windows = sliding_window_view(padded, kernel, axis=1)  # [B, T, Cin, k]
    cols = windows.transpose(0, 1, 3, 2).reshape(batch * steps, kernel * in_channels)
    out = cols @ weight.reshape(kernel * in_channels, out_channels) + bias
    return out.reshape(batch, steps, out_channels), ConvCache(cols, (batch, steps, in_channels), left)


def conv1d_backward(
    d_out: np.ndarray, weight: np.ndarray, cache: ConvCache
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    batch, steps, in_channels = cache.input_shape
    kernel, _, out_channels = weight.shape
    d2 = d_out.reshape(batch * steps, out_channels)
    d_weight = (cache.cols.T @ d2).reshape(kernel, in_channels, out_channels)
    d_bias = d2.sum(axis=0)
    d_cols = (d2 @ weight.reshape(kernel * in_channels, out_channels).T).reshape(batch, steps, kernel, in_channels)
    d_padded = np.zeros((batch, steps + kernel - 1, in_channels), dtype=d_out.dtype)
    for offset in range(kernel):
        d_padded[:, offset:offset + steps, :] += d_cols[:, :, offset, :]
    d_x = d_padded[:, cache.left_pad:cache.left_pad + steps, :]
    return d_x, d_weight, d_bias


@dataclass
class BatchNormCache:
    x_hat: np.ndarray
    inv_std: np.ndarray
    training: bool


@dataclass
class BatchStats:
    """Per-channel statistics of one training batch, for the running averages."""
    mean: np.ndarray
    var: np.ndarray
    count: int


def batchnorm_forward(
    x: np.ndarray,
    gamma: np.ndarray,
    beta: np.ndarray,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool,
) -> tuple[np.ndarray, BatchNormCache, BatchStats | None]:
    """Normalize each channel over batch and time (train) or with running statistics (eval)."""
    if training:
        mean = x.mean(axis=(0, 1))
        var = x.var(axis=(0, 1))
        stats = BatchStats(mean=mean, var=var, count=x.shape[0] * x.shape[1])
    else:
        mean, var, stats = running_mean, running_var, None
    inv_std = 1.0 / np.sqrt(var + BN_EPS)
    x_hat = (x - mean) * inv_std
    return gamma * x_hat + beta, BatchNormCache(x_hat, inv_std, training), stats


def batchnorm_backward(
    d_out: np.ndarray, gamma: np.ndarray, cache: BatchNormCache
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    d_gamma = (d_out * cache.x_hat).sum(axis=(0, 1))
    d_beta = d_out.sum(axis=(0, 1))
    d_x_hat = d_out * gamma
    if not cache.training:
        return d_x_hat * cache.inv_std, d_gamma, d_beta
    n = d_out.shape[0] * d_out.shape[1]
    d_x = (cache.inv_std / n) * (
        n * d_x_hat
        - d_x_hat.sum(axis=(0, 1))
        - cache.x_hat * (d_x_hat * cache.x_hat).sum(axis=(0, 1))
    )
    return d_x, d_gamma, d_beta


def relu_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mask = x > 0
    return x * mask, mask


def relu_backward(d_out: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return d_out * mask


def time_mask(lengths: np.ndarray, steps: int, dtype: np.dtype) -> np.ndarray:
    """[B, T, 1] mask that is 1 on the first max(length, 1) positions."""
    valid = np.maximum(lengths, 1)
    return (np.arange(steps)[None, :] < valid[:, None]).astype(dtype)[:, :, None]


def masked_max_pool_forward(h: np.ndarray, lengths: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Global max over the first max(length, 1) time steps of each sequence.

    Positions past `length` are excluded so trailing PAD never changes the
    pooled value; an all-PAD sequence pools its first position.
    """
    steps = h.shape[1]
    valid = np.maximum(lengths, 1)
    mask = np.arange(steps)[None, :] < valid[:, None]
    masked = np.where(mask[:, :, None], h, -np.inf)
    argmax = masked.argmax(axis=1)  # [B, C]
    pooled = np.take_along_axis(h, argmax[:, None, :], axis=1)[:, 0, :]
    return pooled, argmax


def masked_max_pool_backward(d_out: np.ndarray, argmax: np.ndarray, steps: int) -> np.ndarray:
    d_h = np.zeros((d_out.shape[0], steps, d_out.shape[1]), dtype=d_out.dtype)
    np.put_along_axis(d_h, argmax[:, None, :], d_out[:, None, :], axis=1)
    return d_h


def linear_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    return x @ weight + bias


def linear_backward(
    d_out: np.ndarray, x: np.ndarray, weight: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return d_out @ weight.T, x.T @ d_out, d_out.sum(axis=0)
