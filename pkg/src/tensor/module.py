from typing import Dict, Iterator, List, Tuple

import numpy as np

from src.errors import ShapeError
from src.tensor import ops
from src.tensor.core import Tensor, default_dtype


def parameter(data) -> Tensor:
    return Tensor(np.asarray(data, dtype=default_dtype()), requires_grad=True)


def uniform_parameter(rng: np.random.Generator, shape, bound: float) -> Tensor:
    return parameter(rng.uniform(-bound, bound, size=shape))


class Module:
    """Parameter container; parameters are discovered from attributes in definition order."""

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        for name, value in vars(self).items():
            full = f"{prefix}{name}"
            if isinstance(value, Tensor):
                if value.requires_grad:
                    yield full, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{full}.")
            elif isinstance(value, (list, tuple)):
                for index, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{full}.{index}.")

    def parameters(self) -> List[Tensor]:
        return [p for _, p in self.named_parameters()]

    def parameter_count(self) -> int:
        return int(np.sum([p.size for p in self.parameters()]))

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        own = dict(self.named_parameters())
        missing = sorted(set(own) - set(state))
        unexpected = sorted(set(state) - set(own))
        if missing or unexpected:
            raise KeyError(f"state mismatch: missing={missing}, unexpected={unexpected}")
        for name, p in own.items():
            value = np.asarray(state[name])
            if value.shape != p.shape:
                raise ShapeError(f"load_state_dict[{name}]", p.shape, value.shape)
            p.data = value.astype(p.data.dtype)


class Linear(Module):
    def __init__(self, rng: np.random.Generator, d_in: int, d_out: int, bias: bool = True) -> None:
        bound = 1.0 / np.sqrt(d_in)
        self.weight = uniform_parameter(rng, (d_in, d_out), bound)
        self.bias = parameter(np.zeros(d_out)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        out = ops.matmul(x, self.weight)
        if self.bias is not None:
            out = ops.add_bias(out, self.bias)
        return out


class LayerNorm(Module):
    def __init__(self, channels: int, eps: float = 1e-5) -> None:
        self.gamma = parameter(np.ones(channels))
        self.beta = parameter(np.zeros(channels))
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        return ops.layernorm(x, self.gamma, self.beta, self.eps)
