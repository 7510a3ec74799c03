"""Diagonal linear recurrences ``h_t = a_t * h_{t-1} + b_t`` and the selective scan op.

Two kernels compute the same recurrence: a left-to-right loop and a Hillis-Steele
associative scan over pairs ``(a, b)`` with ``(a2, b2) o (a1, b1) = (a2 a1, a2 b1 + b2)``,
which takes ceil(log2 L) vectorized sweeps for O(L log L) work.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from src.errors import NonFiniteStateError, SelectiveModeError, ShapeError
from src.tensor.core import Tensor, custom_op, is_grad_enabled

SEQUENTIAL = "sequential"
PARALLEL = "parallel"


def scan_sequential(a: np.ndarray, b: np.ndarray, h0: Optional[np.ndarray] = None) -> np.ndarray:
    """Left-to-right recurrence over axis 0; returns every state."""
    h = np.empty_like(b)
    state = np.zeros_like(b[0]) if h0 is None else h0
    for t in range(b.shape[0]):
        state = a[t] * state + b[t]
        if not np.all(np.isfinite(state)):
            raise NonFiniteStateError(t)
        h[t] = state
    return h


def scan_parallel(a: np.ndarray, b: np.ndarray, h0: Optional[np.ndarray] = None) -> np.ndarray:
    """Inclusive associative scan; same result as :func:`scan_sequential`."""
    a = a.copy()
    h = b.copy()
    if h0 is not None:
        h[0] = h[0] + a[0] * h0
    length = h.shape[0]
    stride = 1
    while stride < length:
        # right-hand sides are evaluated before assignment, so both read the previous sweep
        h[stride:] = a[stride:] * h[:-stride] + h[stride:]
        a[stride:] = a[stride:] * a[:-stride]
        stride *= 2
    finite = np.isfinite(h).reshape(length, -1).all(axis=1)
    if not finite.all():
        raise NonFiniteStateError(int(np.argmin(finite)))
    return h


KERNELS: Dict[str, Callable[..., np.ndarray]] = {
    SEQUENTIAL: scan_sequential,
    PARALLEL: scan_parallel,
}


def _kernel(mode: str) -> Callable[..., np.ndarray]:
    try:
        return KERNELS[mode]
    except KeyError:
        raise ValueError(f"unknown scan mode {mode!r}") from None


def discretize(u: np.ndarray, delta: np.ndarray, A: np.ndarray, B: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Zero-order hold with the first-order input term: Ā = exp(ΔA), B̄x = ΔBx."""
    a_bar = np.exp(delta[:, :, None] * A[None])
    bx = (delta * u)[:, :, None] * B[:, None, :]
    return a_bar, bx


@dataclass
class ScanInputs:
    """Per-position inputs of one scan: u, Δ [L×D], A [D×N], B, C [L×N]."""

    u: np.ndarray
    delta: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self) -> None:
        length, channels = self.u.shape
        n_state = self.A.shape[1]
        if (
            self.delta.shape != (length, channels)
            or self.A.shape != (channels, n_state)
            or self.B.shape != (length, n_state)
            or self.C.shape != (length, n_state)
        ):
            raise ShapeError("ScanInputs", self.u.shape, self.delta.shape, self.A.shape, self.B.shape, self.C.shape)

    @classmethod
    def time_invariant(cls, u: np.ndarray, delta: np.ndarray, A: np.ndarray, B: np.ndarray, C: np.ndarray) -> "ScanInputs":
        """Broadcast a single Δ [D], B [N], C [N] over every position."""
        length = u.shape[0]
        return cls(
            u=u,
            delta=np.broadcast_to(delta, (length, delta.shape[0])).copy(),
            A=A,
            B=np.broadcast_to(B, (length, B.shape[0])).copy(),
            C=np.broadcast_to(C, (length, C.shape[0])).copy(),
        )

    def is_time_invariant(self) -> bool:
        return all(np.array_equal(arr, np.broadcast_to(arr[0], arr.shape)) for arr in (self.delta, self.B, self.C))

    def lti_kernel(self) -> np.ndarray:
        if not self.is_time_invariant():
            raise SelectiveModeError("convolution kernel is undefined when Δ, B or C vary along the sequence")
        delta0 = self.delta[0]
        a_bar = np.exp(delta0[:, None] * self.A)
        b_bar = delta0[:, None] * self.B[0][None, :]
        return lti_kernel(a_bar, b_bar, self.C[0], self.u.shape[0])


def run_scan(inputs: ScanInputs, mode: str = PARALLEL) -> np.ndarray:
    """Forward value of the scan for plain arrays: y_t = Σ_n C_t[n] h_t[:, n]."""
    a_bar, bx = discretize(inputs.u, inputs.delta, inputs.A, inputs.B)
    h = _kernel(mode)(a_bar, bx)
    return np.einsum("ldn,ln->ld", h, inputs.C)


def lti_kernel(a_bar, b_bar, c, length: int) -> np.ndarray:
    """K_k = Σ_n C_n Ā_n^k B̄_n for k < length.

    Inputs share a trailing state axis; leading axes (e.g. channels) carry through, so
    ``[D×N]`` inputs give a ``[length×D]`` kernel and scalars give ``[length]``.
    """
    a = np.atleast_1d(np.asarray(a_bar, dtype=np.float64))
    b = np.atleast_1d(np.asarray(b_bar, dtype=np.float64))
    c = np.atleast_1d(np.asarray(c, dtype=np.float64))
    powers = np.arange(length).reshape((length,) + (1,) * a.ndim)
    return (a[None] ** powers * b[None] * c[None]).sum(axis=-1)


def causal_convolve(kernel: np.ndarray, x: np.ndarray) -> np.ndarray:
    """y_t = Σ_{k ≤ t} K_k x_{t-k}, per channel."""
    length = x.shape[0]
    if kernel.shape[0] < length:
        raise ShapeError("causal_convolve", kernel.shape, x.shape)
    y = np.zeros(np.broadcast_shapes(kernel[:length].shape, x.shape), dtype=np.result_type(kernel, x))
    for k in range(length):
        y[k:] += kernel[k] * x[:length - k]
    return y


def _streaming_scan(u, delta, A, B, C, chunk_size: int) -> np.ndarray:
    """Chunked forward pass carrying the state across chunks; no states are kept."""
    length = u.shape[0]
    y = np.empty_like(u)
    carry = None
    for start in range(0, length, chunk_size):
        stop = min(start + chunk_size, length)
        a_bar, bx = discretize(u[start:stop], delta[start:stop], A, B[start:stop])
        h = scan_parallel(a_bar, bx, h0=carry)
        y[start:stop] = np.einsum("ldn,ln->ld", h, C[start:stop])
        carry = h[-1]
    return y


def selective_scan(
    u: Tensor,
    delta: Tensor,
    A: Tensor,
    B: Tensor,
    C: Tensor,
    mode: str = PARALLEL,
    chunk_size: Optional[int] = None,
) -> Tensor:
    """Differentiable selective scan.

    The backward pass runs the adjoint recurrence ``g_t = Ā_{t+1} g_{t+1} + C_t dy_t``
    right-to-left through the same kernel.
    """
    ScanInputs(u.data, delta.data, A.data, B.data, C.data)
    parents = (u, delta, A, B, C)
    tracking = is_grad_enabled() and any(p.requires_grad for p in parents)
    if not tracking and chunk_size and u.shape[0] > chunk_size and mode == PARALLEL:
        return Tensor(_streaming_scan(u.data, delta.data, A.data, B.data, C.data, chunk_size), op="selective_scan")

    kernel = _kernel(mode)
    a_bar, bx = discretize(u.data, delta.data, A.data, B.data)
    h = kernel(a_bar, bx)
    y = np.einsum("ldn,ln->ld", h, C.data)

    def backward(g):
        source = g[:, :, None] * C.data[:, None, :]
        a_next = np.zeros_like(a_bar)
        a_next[:-1] = a_bar[1:]
        gh = kernel(a_next[::-1], source[::-1])[::-1]
        h_prev = np.zeros_like(h)
        h_prev[1:] = h[:-1]

        d_logit = gh * h_prev * a_bar
        g_delta = (d_logit * A.data[None]).sum(axis=-1)
        gA = (d_logit * delta.data[:, :, None]).sum(axis=0)

        gh_b = (gh * B.data[:, None, :]).sum(axis=-1)
        g_delta = g_delta + gh_b * u.data
        gu = gh_b * delta.data
        gB = np.einsum("ldn,ld->ln", gh, delta.data * u.data)
        gC = np.einsum("ldn,ld->ln", h, g)
        return gu, g_delta, gA, gB, gC

    return custom_op(y, parents, backward, "selective_scan")
