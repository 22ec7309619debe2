"""Building blocks: pointwise linear maps, causal convolutions, windowed causal attention."""

import math
from typing import Optional, Tuple

import numpy as np

from ..autodiff import Tensor
from ..autodiff import ops
from ..utils.exceptions import DimensionError, ParameterError
from .module import Module, uniform_init

# Replaces masked attention scores; exp() of it underflows to exactly zero.
MASK_VALUE = -1e30


class Linear(Module):
    """Frame-wise affine map (a 1x1 convolution over time)."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, dtype: str = "float64"):
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.weight = uniform_init(rng, (in_dim, out_dim), in_dim, dtype)
        self.bias = uniform_init(rng, (out_dim,), in_dim, dtype)

    def forward(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.in_dim:
            raise DimensionError(
                f"Linear expects width {self.in_dim}, got {x.shape[-1]}",
                expected=(self.in_dim,),
                actual=(x.shape[-1],),
            )
        return ops.add(ops.matmul(x, self.weight), self.bias)


class CausalConv1d(Module):
    """Causal dilated convolution with a (kernel, in, out) weight."""

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        kernel_size: int,
        dilation: int,
        rng: np.random.Generator,
        dtype: str = "float64",
    ):
        super().__init__()
        if dilation < 1:
            raise ParameterError(f"Dilation must be >= 1, got {dilation}")
        self.dilation = dilation
        self.kernel_size = kernel_size
        fan_in = kernel_size * in_dim
        self.weight = uniform_init(rng, (kernel_size, in_dim, out_dim), fan_in, dtype)
        self.bias = uniform_init(rng, (out_dim,), fan_in, dtype)

    @property
    def reach(self) -> int:
        """How many past frames the output at t can see."""
        return (self.kernel_size - 1) * self.dilation

    def forward(self, x: Tensor) -> Tensor:
        return ops.causal_dilated_conv1d(x, self.weight, self.dilation, self.bias)


def window_layout(length: int, window: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int]:
    """Index grids for block-partitioned causal attention.

    The timeline is cut into blocks of ``w = min(window, length)`` frames.
    Queries of block b are frames ``b*w .. b*w + w - 1``; their keys are the
    ``2w`` frames starting at ``(b - 1) * w``, i.e. the previous block and the
    current one.

    Returns:
        (query_index, query_valid, key_index, key_valid, w) with query arrays
        shaped (blocks, w) and key arrays shaped (blocks, 2w).
    """
    if window < 1:
        raise ParameterError(f"Attention window must be >= 1, got {window}")
    w = min(window, length)
    blocks = math.ceil(length / w)
    starts = np.arange(blocks)[:, None] * w
    query_index = starts + np.arange(w)[None, :]
    key_index = starts - w + np.arange(2 * w)[None, :]
    query_valid = query_index < length
    key_valid = (key_index >= 0) & (key_index < length)
    return query_index, query_valid, key_index, key_valid, w


def causal_window_mask(query_index: np.ndarray, key_index: np.ndarray, key_valid: np.ndarray) -> np.ndarray:
    """True where a score must be masked: future keys and padding."""
    allowed = (key_index[:, None, :] <= query_index[:, :, None]) & key_valid[:, None, :]
    return ~allowed


class WindowedCausalAttention(Module):
    """Single-head attention restricted to the previous and current window, causally masked.

    With ``memory`` given, queries come from ``x`` and keys/values from
    ``memory`` (cross-attention); both must have the same length.
    """

    def __init__(self, dim: int, window: int, rng: np.random.Generator, dtype: str = "float64"):
        super().__init__()
        self.dim = dim
        self.window = window
        self.query = Linear(dim, dim, rng, dtype)
        self.key = Linear(dim, dim, rng, dtype)
        self.value = Linear(dim, dim, rng, dtype)
        self.output = Linear(dim, dim, rng, dtype)

    def forward(self, x: Tensor, memory: Optional[Tensor] = None) -> Tensor:
        source = x if memory is None else memory
        if source.shape[0] != x.shape[0]:
            raise DimensionError(
                f"Cross-attention memory has {source.shape[0]} frames, queries have {x.shape[0]}",
                expected=(x.shape[0],),
                actual=(source.shape[0],),
            )
        length = x.shape[0]
        q = self.query(x)
        k = self.key(source)
        v = self.value(source)

        query_index, query_valid, key_index, key_valid, w = window_layout(length, self.window)
        q_blocks = ops.gather_rows(q, query_index, query_valid)
        k_blocks = ops.gather_rows(k, key_index, key_valid)
        v_blocks = ops.gather_rows(v, key_index, key_valid)

        scores = ops.scale(ops.matmul(q_blocks, ops.transpose_last(k_blocks)), 1.0 / math.sqrt(self.dim))
        scores = ops.masked_fill(scores, causal_window_mask(query_index, key_index, key_valid), MASK_VALUE)
        attended = ops.matmul(ops.softmax(scores, axis=-1), v_blocks)

        flat = ops.reshape(attended, (query_index.size, self.dim))
        return self.output(ops.slice_rows(flat, 0, length))

