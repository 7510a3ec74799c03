from dataclasses import dataclass, field
from typing import Dict, Iterable, Tuple

import numpy as np

from src.tensor.core import Tensor
from src.training.config import TrainConfig
from src.utils.logger import logger

MOMENT_PREFIXES = ("adam.m.", "adam.v.")


def polynomial_lr(step: int, config: TrainConfig) -> float:
    """end + (start - end)(1 - step/total)^power, clamped to the schedule range."""
    progress = min(max(step, 0), config.total_steps) / config.total_steps
    return config.end_lr + (config.lr_start - config.end_lr) * (1.0 - progress) ** config.power


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    def to_tensors(self) -> Dict[str, np.ndarray]:
        tensors = {f"adam.m.{name}": value for name, value in self.m.items()}
        tensors.update({f"adam.v.{name}": value for name, value in self.v.items()})
        return tensors

    @classmethod
    def from_tensors(cls, tensors: Dict[str, np.ndarray], t: int) -> "AdamState":
        m_prefix, v_prefix = MOMENT_PREFIXES
        return cls(
            t=t,
            m={name[len(m_prefix):]: value for name, value in tensors.items() if name.startswith(m_prefix)},
            v={name[len(v_prefix):]: value for name, value in tensors.items() if name.startswith(v_prefix)},
        )


def adam_step(params: Iterable[Tuple[str, Tensor]], state: AdamState, lr: float) -> bool:
    """Apply one bias-corrected Adam update in place; False if the step was skipped.

    A missing gradient counts as zero. Any non-finite gradient skips the whole step
    and leaves parameters and moments untouched.
    """
    params = list(params)
    grads = {}
    for name, p in params:
        grad = p.grad if p.grad is not None else np.zeros_like(p.data)
        if not np.all(np.isfinite(grad)):
            logger.warning(f"Non-finite gradient in {name}; skipping optimizer step {state.t + 1}")
            return False
        grads[name] = grad

    state.t += 1
    correction1 = 1.0 - state.beta1 ** state.t
    correction2 = 1.0 - state.beta2 ** state.t
    for name, p in params:
        grad = grads[name]
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(p.data)
            v = np.zeros_like(p.data)
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * grad * grad
        state.m[name], state.v[name] = m, v
        update = lr * (m / correction1) / (np.sqrt(v / correction2) + state.eps)
        p.data = (p.data - update).astype(p.data.dtype)
    return True
