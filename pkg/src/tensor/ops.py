"""Differentiable operations over :class:`Tensor`.

Binary elementwise ops accept operands of identical shape, or one scalar operand
(python number or single-element tensor). ``add_bias`` and ``mul_row`` are the only
row-vector broadcasts and exist for linear layers and per-channel scales.
"""

from typing import Optional, Tuple

import numpy as np

from src.errors import ShapeError
from src.tensor.core import Tensor, as_tensor, custom_op


def _is_scalar(t: Tensor) -> bool:
    return t.size == 1 and t.ndim <= 1


def _binary_operands(op: str, a, b) -> Tuple[Tensor, Tensor]:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape == b.shape or _is_scalar(a) or _is_scalar(b):
        return a, b
    raise ShapeError(op, a.shape, b.shape)


def _reduce_to(grad: np.ndarray, target: Tensor) -> np.ndarray:
    if grad.shape == target.shape:
        return grad
    return np.asarray(grad.sum()).reshape(target.shape)


def add(a, b) -> Tensor:
    a, b = _binary_operands("add", a, b)

    def backward(g):
        return _reduce_to(g, a), _reduce_to(g, b)

    return custom_op(a.data + b.data, (a, b), backward, "add")


def sub(a, b) -> Tensor:
    a, b = _binary_operands("sub", a, b)

    def backward(g):
        return _reduce_to(g, a), _reduce_to(-g, b)

    return custom_op(a.data - b.data, (a, b), backward, "sub")


def mul(a, b) -> Tensor:
    a, b = _binary_operands("mul", a, b)

    def backward(g):
        return _reduce_to(g * b.data, a), _reduce_to(g * a.data, b)

    return custom_op(a.data * b.data, (a, b), backward, "mul")


def scale(a: Tensor, factor: float) -> Tensor:
    factor = float(factor)

    def backward(g):
        return (g * factor,)

    return custom_op(a.data * a.data.dtype.type(factor), (a,), backward, "scale")


def tanh(a: Tensor) -> Tensor:
    value = np.tanh(a.data)

    def backward(g):
        return (g * (1.0 - value * value),)

    return custom_op(value, (a,), backward, "tanh")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def silu(a: Tensor) -> Tensor:
    sig = _sigmoid(a.data)
    value = a.data * sig

    def backward(g):
        return (g * (sig * (1.0 + a.data * (1.0 - sig))),)

    return custom_op(value, (a,), backward, "silu")


def softplus(a: Tensor) -> Tensor:
    value = np.logaddexp(0.0, a.data).astype(a.data.dtype, copy=False)

    def backward(g):
        return (g * _sigmoid(a.data),)

    return custom_op(value, (a,), backward, "softplus")


def exp(a: Tensor) -> Tensor:
    value = np.exp(a.data)

    def backward(g):
        return (g * value,)

    return custom_op(value, (a,), backward, "exp")


def sqrt(a: Tensor) -> Tensor:
    value = np.sqrt(np.maximum(a.data, 0.0))

    def backward(g):
        safe = np.where(value > 0, value, 1.0)
        return (np.where(value > 0, g * 0.5 / safe, 0.0),)

    return custom_op(value, (a,), backward, "sqrt")


def sum(a: Tensor) -> Tensor:  # noqa: A001 - mirrors numpy naming
    def backward(g):
        return (np.full(a.shape, g.reshape(-1)[0], dtype=a.data.dtype),)

    return custom_op(np.asarray(a.data.sum(), dtype=a.data.dtype), (a,), backward, "sum")


def mean(a: Tensor) -> Tensor:
    n = max(a.size, 1)
    return scale(sum(a), 1.0 / n)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape)

    def backward(g):
        ga = g @ b.data.T if a.requires_grad else None
        gb = a.data.T @ g if b.requires_grad else None
        return ga, gb

    return custom_op(a.data @ b.data, (a, b), backward, "matmul")


def add_bias(x: Tensor, bias: Tensor) -> Tensor:
    if x.ndim != 2 or bias.shape != (x.shape[1],):
        raise ShapeError("add_bias", x.shape, bias.shape)

    def backward(g):
        return g, g.sum(axis=0)

    return custom_op(x.data + bias.data, (x, bias), backward, "add_bias")


def mul_row(x: Tensor, row: Tensor) -> Tensor:
    if x.ndim != 2 or row.shape != (x.shape[1],):
        raise ShapeError("mul_row", x.shape, row.shape)

    def backward(g):
        return g * row.data, (g * x.data).sum(axis=0)

    return custom_op(x.data * row.data, (x, row), backward, "mul_row")


def _padding(width: int, padding: str) -> Tuple[int, int]:
    if padding == "causal":
        return width - 1, 0
    if padding == "same":
        left = (width - 1) // 2
        return left, width - 1 - left
    raise ValueError(f"unknown padding mode {padding!r}")


def conv1d_depthwise(x: Tensor, kernel: Tensor, padding: str = "causal") -> Tensor:
    """Per-channel 1D convolution; output length equals input length.

    ``kernel[i, c]`` multiplies ``x[t - left + i, c]``, so under causal padding the
    last tap sees the current position.
    """
    if x.ndim != 2 or kernel.ndim != 2 or kernel.shape[1] != x.shape[1]:
        raise ShapeError("conv1d_depthwise", x.shape, kernel.shape)
    width, seq = kernel.shape[0], x.shape[0]
    if width < 1:
        raise ShapeError("conv1d_depthwise", x.shape, kernel.shape, detail="empty kernel")
    if width > seq:
        raise ShapeError("conv1d_depthwise", x.shape, kernel.shape, detail="kernel wider than sequence")
    left, right = _padding(width, padding)
    xp = np.pad(x.data, ((left, right), (0, 0)))
    out = np.zeros_like(x.data)
    for i in range(width):
        out += kernel.data[i] * xp[i:i + seq]

    def backward(g):
        gx = None
        if x.requires_grad:
            gxp = np.zeros_like(xp)
            for i in range(width):
                gxp[i:i + seq] += g * kernel.data[i]
            gx = gxp[left:left + seq]
        gk = None
        if kernel.requires_grad:
            gk = np.stack([(g * xp[i:i + seq]).sum(axis=0) for i in range(width)])
        return gx, gk

    return custom_op(out, (x, kernel), backward, "conv1d_depthwise")


def layernorm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    if eps <= 0:
        raise ValueError("layernorm eps must be positive")
    if x.ndim != 2 or gamma.shape != (x.shape[1],) or beta.shape != (x.shape[1],):
        raise ShapeError("layernorm", x.shape, gamma.shape, beta.shape)
    mu = x.data.mean(axis=1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv_std

    def backward(g):
        gxhat = g * gamma.data
        gx = inv_std * (
            gxhat
            - gxhat.mean(axis=1, keepdims=True)
            - xhat * (gxhat * xhat).mean(axis=1, keepdims=True)
        )
        return gx, (g * xhat).sum(axis=0), g.sum(axis=0)

    return custom_op(xhat * gamma.data + beta.data, (x, gamma, beta), backward, "layernorm")


def flip_sequence(x: Tensor) -> Tensor:
    def backward(g):
        return (g[::-1].copy(),)

    return custom_op(x.data[::-1].copy(), (x,), backward, "flip")


def slice_rows(x: Tensor, start: int, stop: Optional[int] = None) -> Tensor:
    stop = x.shape[0] if stop is None else stop
    if not 0 <= start <= stop <= x.shape[0]:
        raise ShapeError("slice_rows", x.shape, detail=f"rows {start}:{stop}")

    def backward(g):
        full = np.zeros_like(x.data)
        full[start:stop] = g
        return (full,)

    return custom_op(x.data[start:stop].copy(), (x,), backward, "slice_rows")


def repeat_rows(x: Tensor, k: int, n_out: int) -> Tensor:
    """Nearest upsampling along the sequence: each row repeated ``k`` times, truncated."""
    n = x.shape[0]
    if k < 1 or n_out > n * k or n_out < 1:
        raise ShapeError("repeat_rows", x.shape, detail=f"k={k}, n_out={n_out}")
    value = np.repeat(x.data, k, axis=0)[:n_out]

    def backward(g):
        padded = np.zeros((n * k,) + x.shape[1:], dtype=g.dtype)
        padded[:n_out] = g
        return (padded.reshape((n, k) + x.shape[1:]).sum(axis=1),)

    return custom_op(value, (x,), backward, "repeat_rows")


def strided_pool(x: Tensor, kernel: Tensor, k: int) -> Tensor:
    """Depthwise convolution with width = stride = ``k``; output has ceil(seq/k) rows."""
    if x.ndim != 2 or kernel.shape != (k, x.shape[1]):
        raise ShapeError("strided_pool", x.shape, kernel.shape)
    seq, channels = x.shape
    n = -(-seq // k)
    xp = np.zeros((n * k, channels), dtype=x.data.dtype)
    xp[:seq] = x.data
    blocks = xp.reshape(n, k, channels)
    value = np.einsum("nkc,kc->nc", blocks, kernel.data)

    def backward(g):
        gx = (g[:, None, :] * kernel.data[None]).reshape(n * k, channels)[:seq]
        gk = np.einsum("nkc,nc->kc", blocks, g)
        return gx, gk

    return custom_op(value, (x, kernel), backward, "strided_pool")


def round_ste(x: Tensor) -> Tensor:
    """Round half to even on the forward pass, identity on the backward pass."""
    def backward(g):
        return (g,)

    return custom_op(np.rint(x.data), (x,), backward, "round_ste")
