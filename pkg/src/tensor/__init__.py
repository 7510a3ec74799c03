from src.tensor.core import Tensor, as_tensor, backward, custom_op, default_dtype, is_grad_enabled, no_grad, precision
from src.tensor.gradcheck import finite_difference_check
from src.tensor.module import LayerNorm, Linear, Module, parameter

__all__ = [
    "Tensor",
    "as_tensor",
    "backward",
    "custom_op",
    "default_dtype",
    "is_grad_enabled",
    "no_grad",
    "precision",
    "finite_difference_check",
    "LayerNorm",
    "Linear",
    "Module",
    "parameter",
]
