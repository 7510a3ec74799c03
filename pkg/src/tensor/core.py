import threading
from contextlib import contextmanager
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import ShapeError

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_state = threading.local()


def _mode():
    if not hasattr(_state, "grad_enabled"):
        _state.grad_enabled = True
        _state.dtype = np.float32
    return _state


def default_dtype() -> type:
    return _mode().dtype


def is_grad_enabled() -> bool:
    return _mode().grad_enabled


@contextmanager
def precision(dtype) -> Iterator[None]:
    """Select the floating-point width of newly created tensors (float32 or float64)."""
    dtype = np.dtype(dtype).type
    if dtype not in (np.float32, np.float64):
        raise ValueError(f"unsupported precision {dtype}")
    mode = _mode()
    previous = mode.dtype
    mode.dtype = dtype
    try:
        yield
    finally:
        mode.dtype = previous


@contextmanager
def no_grad() -> Iterator[None]:
    mode = _mode()
    previous = mode.grad_enabled
    mode.grad_enabled = False
    try:
        yield
    finally:
        mode.grad_enabled = previous


class Tensor:
    """Array with an optional gradient slot and a link to the op that produced it.

    The graph is rebuilt on every forward pass; each non-leaf keeps its parents and a
    backward rule mapping the output gradient to one gradient per parent.
    """

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        _parents: Tuple["Tensor", ...] = (),
        _backward: Optional[BackwardFn] = None,
        op: str = "",
    ) -> None:
        if isinstance(data, np.ndarray) and data.dtype in (np.float32, np.float64):
            self.data = data
        else:
            self.data = np.asarray(data, dtype=default_dtype())
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self._parents = _parents
        self._backward = _backward
        self.op = op

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def is_leaf(self) -> bool:
        return self._backward is None

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype.name}{flag})"

    # operator sugar; the ops module holds the rules
    def __add__(self, other):
        from src.tensor import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from src.tensor import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from src.tensor import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from src.tensor import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from src.tensor import ops
        return ops.mul(self, other)

    def __rmul__(self, other):
        from src.tensor import ops
        return ops.mul(other, self)

    def __neg__(self):
        from src.tensor import ops
        return ops.scale(self, -1.0)

    def __matmul__(self, other):
        from src.tensor import ops
        return ops.matmul(self, other)


def as_tensor(value) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def custom_op(
    value: np.ndarray,
    parents: Sequence[Tensor],
    backward_fn: BackwardFn,
    op: str = "custom",
) -> Tensor:
    """Wrap a forward value computed outside the graph together with its backward rule."""
    parents = tuple(parents)
    track = is_grad_enabled() and any(p.requires_grad for p in parents)
    if not track:
        return Tensor(value, op=op)
    return Tensor(value, requires_grad=True, _parents=parents, _backward=backward_fn, op=op)


def _topological_order(root: Tensor) -> List[Tensor]:
    order: List[Tensor] = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """Reverse-mode accumulation from a scalar loss.

    Leaf gradients are summed into ``.grad`` (so repeated calls accumulate, which is
    what gradient accumulation relies on); intermediate nodes get a fresh ``.grad``.
    """
    if loss.size != 1:
        raise ShapeError("backward", loss.shape, detail="loss must be a scalar")
    if not loss.requires_grad:
        return

    grads = {id(loss): np.ones_like(loss.data)}
    for node in reversed(_topological_order(loss)):
        grad = grads.pop(id(node), None)
        if grad is None:
            continue
        if node.is_leaf:
            node.grad = grad.copy() if node.grad is None else node.grad + grad
            continue
        node.grad = grad
        parent_grads = node._backward(grad)
        for parent, parent_grad in zip(node._parents, parent_grads):
            if parent_grad is None or not parent.requires_grad:
                continue
            parent_grad = np.asarray(parent_grad, dtype=parent.data.dtype)
            if parent_grad.shape != parent.shape:
                parent_grad = parent_grad.reshape(parent.shape)
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + parent_grad
            else:
                grads[key] = parent_grad
