"""Differentiable operations over :class:`Tensor`.

Each operation computes its output with numpy, checks it is finite and, when
gradients are being recorded, attaches the closure that sends the output
gradient back to its inputs.
"""

from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from ..utils.exceptions import DimensionError, ParameterError
from .tensor import Tensor, check_finite, is_grad_enabled

ArrayLike = Union[Tensor, np.ndarray, float, int]


def as_tensor(value: ArrayLike, dtype=None) -> Tensor:
    """Wrap constants; tensors pass through untouched."""
    if isinstance(value, Tensor):
        return value
    array = np.asarray(value, dtype=dtype)
    return Tensor(array)


def _result(
    data: np.ndarray,
    parents: Tuple[Tensor, ...],
    op: str,
    backward: Callable[[np.ndarray], None],
) -> Tensor:
    check_finite(data, op)
    track = is_grad_enabled() and any(p.requires_grad for p in parents)
    out = Tensor(data, requires_grad=track, _parents=parents if track else (), _op=op)
    if track:
        out._backward = backward
    return out


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` back down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_axis(x: Tensor, axis: int) -> int:
    if not -x.ndim <= axis < x.ndim:
        raise ParameterError(f"Axis {axis} is invalid for a {x.ndim}-d tensor")
    return axis % x.ndim


def detach(x: Tensor) -> Tensor:
    """Same values, no gradient path."""
    return Tensor(x.data, requires_grad=False, _op="detach")


def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = a.data + b.data
    except ValueError as e:
        raise DimensionError(f"Cannot add shapes {a.shape} and {b.shape}", a.shape, b.shape) from e

    def backward(g):
        a.accumulate(_unbroadcast(g, a.shape))
        b.accumulate(_unbroadcast(g, b.shape))

    return _result(data, (a, b), "add", backward)


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = a.data - b.data
    except ValueError as e:
        raise DimensionError(f"Cannot subtract shapes {a.shape} and {b.shape}", a.shape, b.shape) from e

    def backward(g):
        a.accumulate(_unbroadcast(g, a.shape))
        b.accumulate(_unbroadcast(-g, b.shape))

    return _result(data, (a, b), "sub", backward)


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = a.data * b.data
    except ValueError as e:
        raise DimensionError(f"Cannot multiply shapes {a.shape} and {b.shape}", a.shape, b.shape) from e

    def backward(g):
        a.accumulate(_unbroadcast(g * b.data, a.shape))
        b.accumulate(_unbroadcast(g * a.data, b.shape))

    return _result(data, (a, b), "mul", backward)


def scale(x: Tensor, factor: float) -> Tensor:
    """Multiply by a constant."""
    data = x.data * x.data.dtype.type(factor)

    def backward(g):
        x.accumulate(g * x.data.dtype.type(factor))

    return _result(data, (x,), "scale", backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product over the last two axes; leading axes must agree exactly."""
    if a.ndim < 2 or b.ndim < 2 or a.ndim != b.ndim:
        raise DimensionError(f"matmul needs matching >=2-d operands, got {a.shape} and {b.shape}", a.shape, b.shape)
    if a.shape[:-2] != b.shape[:-2] or a.shape[-1] != b.shape[-2]:
        raise DimensionError(
            f"matmul inner dimensions disagree: {a.shape} @ {b.shape}",
            expected=(a.shape[-1],),
            actual=(b.shape[-2],),
        )
    data = np.matmul(a.data, b.data)

    def backward(g):
        a.accumulate(np.matmul(g, np.swapaxes(b.data, -1, -2)))
        b.accumulate(np.matmul(np.swapaxes(a.data, -1, -2), g))

    return _result(data, (a, b), "matmul", backward)


def transpose_last(x: Tensor) -> Tensor:
    """Swap the last two axes."""
    data = np.swapaxes(x.data, -1, -2)

    def backward(g):
        x.accumulate(np.swapaxes(g, -1, -2))

    return _result(data, (x,), "transpose", backward)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        data = x.data.reshape(tuple(shape))
    except ValueError as e:
        raise DimensionError(f"Cannot reshape {x.shape} to {tuple(shape)}", tuple(shape), x.shape) from e

    def backward(g):
        x.accumulate(g.reshape(x.shape))

    return _result(data, (x,), "reshape", backward)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    data = np.where(mask, x.data, x.data.dtype.type(0))

    def backward(g):
        x.accumulate(np.where(mask, g, g.dtype.type(0)))

    return _result(data, (x,), "relu", backward)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Max-subtracted softmax along ``axis``."""
    axis = _check_axis(x, axis)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    data = exp / exp.sum(axis=axis, keepdims=True)

    def backward(g):
        inner = (g * data).sum(axis=axis, keepdims=True)
        x.accumulate(data * (g - inner))

    return _result(data, (x,), "softmax", backward)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    axis = _check_axis(x, axis)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    data = shifted - log_norm
    probs = np.exp(data)

    def backward(g):
        x.accumulate(g - probs * g.sum(axis=axis, keepdims=True))

    return _result(data, (x,), "log_softmax", backward)


def masked_fill(x: Tensor, mask: np.ndarray, value: float) -> Tensor:
    """Replace entries where ``mask`` is true by ``value``; they receive no gradient."""
    mask = np.broadcast_to(np.asarray(mask, dtype=bool), x.shape)
    data = np.where(mask, x.data.dtype.type(value), x.data)

    def backward(g):
        x.accumulate(np.where(mask, g.dtype.type(0), g))

    return _result(data, (x,), "masked_fill", backward)


def gather_rows(x: Tensor, index: np.ndarray, valid: Optional[np.ndarray] = None) -> Tensor:
    """Gather rows of a 2-d tensor into ``index.shape + (d,)``; invalid slots are zero."""
    if x.ndim != 2:
        raise DimensionError(f"gather_rows needs a 2-d tensor, got {x.shape}", actual=x.shape)
    index = np.asarray(index, dtype=np.int64)
    if valid is None:
        valid = np.ones(index.shape, dtype=bool)
    valid = np.asarray(valid, dtype=bool)
    if valid.shape != index.shape:
        raise DimensionError("gather_rows mask must match index shape", index.shape, valid.shape)
    picked = index[valid]
    if picked.size and (picked.min() < 0 or picked.max() >= x.shape[0]):
        raise ParameterError(f"gather_rows index out of range for {x.shape[0]} rows")
    data = np.zeros(index.shape + (x.shape[1],), dtype=x.data.dtype)
    data[valid] = x.data[picked]

    def backward(g):
        gx = np.zeros_like(x.data)
        np.add.at(gx, picked, g[valid])
        x.accumulate(gx)

    return _result(data, (x,), "gather_rows", backward)


def slice_rows(x: Tensor, start: int, stop: int) -> Tensor:
    """Rows ``[start, stop)`` along the first axis."""
    if not 0 <= start <= stop <= x.shape[0]:
        raise ParameterError(f"Row slice [{start}, {stop}) is outside [0, {x.shape[0]}]")
    data = x.data[start:stop]

    def backward(g):
        gx = np.zeros_like(x.data)
        gx[start:stop] = g
        x.accumulate(gx)

    return _result(data, (x,), "slice_rows", backward)


def clamp(x: Tensor, lo: float, hi: float) -> Tensor:
    if lo > hi:
        raise ParameterError(f"clamp bounds reversed: [{lo}, {hi}]")
    inside = (x.data >= lo) & (x.data <= hi)
    data = np.clip(x.data, lo, hi)

    def backward(g):
        x.accumulate(np.where(inside, g, g.dtype.type(0)))

    return _result(data, (x,), "clamp", backward)


def pick(x: Tensor, labels: np.ndarray) -> Tensor:
    """``x[t, labels[t]]`` for a (T, C) tensor."""
    labels = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or labels.shape != (x.shape[0],):
        raise DimensionError(f"pick needs (T, C) logits and T labels, got {x.shape} and {labels.shape}",
                             (x.shape[0],), labels.shape)
    rows = np.arange(x.shape[0])
    data = x.data[rows, labels]

    def backward(g):
        gx = np.zeros_like(x.data)
        gx[rows, labels] = g
        x.accumulate(gx)

    return _result(data, (x,), "pick", backward)


def sum(x: Tensor, axis: Optional[int] = None) -> Tensor:  # noqa: A001
    if axis is not None:
        axis = _check_axis(x, axis)
    data = np.asarray(x.data.sum(axis=axis))

    def backward(g):
        if axis is None:
            x.accumulate(np.broadcast_to(g, x.shape).copy())
        else:
            x.accumulate(np.broadcast_to(np.expand_dims(g, axis), x.shape).copy())

    return _result(data, (x,), "sum", backward)


def mean(x: Tensor) -> Tensor:
    count = x.data.size
    data = np.asarray(x.data.mean())

    def backward(g):
        x.accumulate(np.full(x.shape, g / count, dtype=x.data.dtype))

    return _result(data, (x,), "mean", backward)


def causal_dilated_conv1d(
    x: Tensor,
    weight: Tensor,
    dilation: int,
    bias: Optional[Tensor] = None,
) -> Tensor:
    """Causal dilated convolution of a (T, d_in) sequence with a (k, d_in, d_out) kernel.

    The input is left-padded with ``(k - 1) * dilation`` zero frames so the
    output keeps length T; tap ``k - 1`` reads the current frame and tap ``j``
    reads frame ``t - (k - 1 - j) * dilation``.
    """
    if dilation < 1:
        raise ParameterError(f"Dilation must be >= 1, got {dilation}")
    if x.ndim != 2 or weight.ndim != 3:
        raise DimensionError(f"conv needs (T, d_in) input and (k, d_in, d_out) kernel, got {x.shape}, {weight.shape}",
                             actual=x.shape)
    k, d_in, d_out = weight.shape
    if k < 1:
        raise ParameterError("Kernel size must be >= 1")
    if x.shape[1] != d_in:
        raise DimensionError(f"conv input width {x.shape[1]} != kernel width {d_in}", (d_in,), (x.shape[1],))

    T = x.shape[0]
    pad = (k - 1) * dilation
    padded = np.concatenate([np.zeros((pad, d_in), dtype=x.data.dtype), x.data], axis=0)
    data = np.zeros((T, d_out), dtype=np.result_type(x.data, weight.data))
    for j in range(k):
        data = data + padded[j * dilation: j * dilation + T] @ weight.data[j]
    parents = (x, weight)
    if bias is not None:
        data = data + bias.data
        parents = (x, weight, bias)

    def backward(g):
        g_padded = np.zeros_like(padded)
        g_weight = np.zeros_like(weight.data)
        for j in range(k):
            g_padded[j * dilation: j * dilation + T] += g @ weight.data[j].T
            g_weight[j] = padded[j * dilation: j * dilation + T].T @ g
        x.accumulate(g_padded[pad:])
        weight.accumulate(g_weight)
        if bias is not None:
            bias.accumulate(g.sum(axis=0))

    return _result(data, parents, "causal_dilated_conv1d", backward)
