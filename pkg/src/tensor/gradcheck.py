from typing import Callable, Dict, Mapping, Optional, Sequence, Union

import numpy as np

from src.errors import GradientCheckError
from src.tensor.core import Tensor, backward, no_grad

Params = Union[Mapping[str, Tensor], Sequence[Tensor]]


def _named(params: Params) -> Dict[str, Tensor]:
    if isinstance(params, Mapping):
        return dict(params)
    return {f"param{i}": p for i, p in enumerate(params)}


def finite_difference_check(
    f: Callable[[], Tensor],
    params: Params,
    eps: float = 1e-6,
    max_coords: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    floor: float = 1e-6,
) -> float:
    """Compare backward gradients of ``f`` with central differences.

    Returns the worst relative error ``|fd - an| / max(|fd| + |an|, floor)``.
    ``max_coords`` limits the number of checked coordinates per parameter; checked
    coordinates are then drawn with ``rng``.
    """
    named = _named(params)
    if not 1e-6 <= eps <= 1e-3:
        raise ValueError(f"eps {eps} outside [1e-6, 1e-3]")
    for name, p in named.items():
        if p.data.dtype != np.float64:
            raise ValueError(f"{name} is {p.data.dtype}; finite-difference checks need float64 mode")

    for p in named.values():
        p.grad = None
    loss = f()
    backward(loss)
    analytic = {
        name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
        for name, p in named.items()
    }

    rng = rng or np.random.default_rng(0)
    worst = 0.0
    with no_grad():
        for name, p in named.items():
            flat = p.data.reshape(-1)
            coords = np.arange(flat.size)
            if max_coords is not None and flat.size > max_coords:
                coords = np.sort(rng.choice(flat.size, size=max_coords, replace=False))
            grad_flat = analytic[name].reshape(-1)
            for index in coords:
                original = flat[index]
                flat[index] = original + eps
                plus = f().item()
                flat[index] = original - eps
                minus = f().item()
                flat[index] = original
                if not (np.isfinite(plus) and np.isfinite(minus)):
                    raise GradientCheckError(name, int(index), "non-finite function value")
                numeric = (plus - minus) / (2.0 * eps)
                exact = grad_flat[index]
                if not np.isfinite(exact):
                    raise GradientCheckError(name, int(index), "non-finite analytic gradient")
                denom = max(abs(numeric) + abs(exact), floor)
                worst = max(worst, abs(numeric - exact) / denom)
    return worst
