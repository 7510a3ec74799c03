import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.ssm.scan import PARALLEL, selective_scan
from src.tensor import ops
from src.tensor.core import Tensor
from src.tensor.module import Linear, Module, parameter, uniform_parameter


@dataclass(frozen=True)
class SsmConfig:
    d_model: int = 128
    d_state: int = 16
    conv_width: int = 4
    expand: int = 2
    dt_rank: Optional[int] = None
    dt_min: float = 1e-3
    dt_max: float = 1e-1
    scan_mode: str = PARALLEL
    chunk_size: int = 2048

    @property
    def d_inner(self) -> int:
        return self.expand * self.d_model

    @property
    def rank(self) -> int:
        return self.dt_rank or math.ceil(self.d_model / 16)


class SsmParams(Module):
    """Weights of one selective-SSM block.

    A = -exp(A_log) keeps every decay strictly negative and Δ = softplus(...) keeps
    every step positive, so Ā = exp(ΔA) lies in (0, 1).
    """

    def __init__(self, config: SsmConfig, rng: np.random.Generator) -> None:
        self.config = config
        d_model, d_inner, d_state = config.d_model, config.d_inner, config.d_state
        width, rank = config.conv_width, config.rank

        self.in_proj = Linear(rng, d_model, d_inner, bias=False)
        self.gate_proj = Linear(rng, d_model, d_inner, bias=False)
        self.conv_kernel = uniform_parameter(rng, (width, d_inner), 1.0 / math.sqrt(width))
        self.conv_bias = parameter(np.zeros(d_inner))
        self.delta_down = Linear(rng, d_inner, rank, bias=False)
        self.delta_up = Linear(rng, rank, d_inner, bias=True)
        self.B_proj = Linear(rng, d_inner, d_state, bias=False)
        self.C_proj = Linear(rng, d_inner, d_state, bias=False)
        self.A_log = parameter(np.tile(np.log(np.arange(1, d_state + 1, dtype=np.float64)), (d_inner, 1)))
        self.D = parameter(np.ones(d_inner))
        self.out_proj = Linear(rng, d_inner, d_model, bias=False)

        dt = np.exp(rng.uniform(math.log(config.dt_min), math.log(config.dt_max), size=d_inner))
        self.delta_up.bias.data = (dt + np.log(-np.expm1(-dt))).astype(self.delta_up.bias.data.dtype)

    def zero_(self) -> None:
        """Zero every weight (no position mixing; used as a reference construction)."""
        for _, p in self.named_parameters():
            p.data = np.zeros_like(p.data)


def ssm_branch(xc: Tensor, p: SsmParams) -> Tensor:
    delta = ops.softplus(p.delta_up(p.delta_down(xc)))
    A = ops.scale(ops.exp(p.A_log), -1.0)
    y = selective_scan(
        xc, delta, A, p.B_proj(xc), p.C_proj(xc),
        mode=p.config.scan_mode, chunk_size=p.config.chunk_size,
    )
    return ops.add(y, ops.mul_row(xc, p.D))


def mamba_block(x: Tensor, p: SsmParams) -> Tensor:
    """out_proj(ssm(silu(conv(in_proj x))) ⊙ silu(gate_proj x)); residual and norm are the caller's."""
    seq = x.shape[0]
    kernel = p.conv_kernel
    width = kernel.shape[0]
    if seq < width:
        # earlier taps only ever multiply left padding
        kernel = ops.slice_rows(kernel, width - seq, width)
    conv = ops.conv1d_depthwise(p.in_proj(x), kernel, padding="causal")
    xc = ops.silu(ops.add_bias(conv, p.conv_bias))
    gate = ops.silu(p.gate_proj(x))
    return p.out_proj(ops.mul(ssm_branch(xc, p), gate))


def bidirectional_block(x: Tensor, p: SsmParams) -> Tensor:
    """Forward pass plus the flipped pass through the same weights."""
    forward = mamba_block(x, p)
    backward = ops.flip_sequence(mamba_block(ops.flip_sequence(x), p))
    return ops.add(forward, backward)
