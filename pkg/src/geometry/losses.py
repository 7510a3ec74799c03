from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from src.errors import ShapeError
from src.geometry.alignment import Coords, kabsch
from src.geometry.pointcloud import ResidueGroups, coords_of
from src.tensor import ops
from src.tensor.core import Tensor, custom_op


@dataclass(frozen=True)
class LossConfig:
    rmse_weight: float = 0.5
    interatomic_weight: float = 0.5
    use_interatomic: bool = True
    align: bool = True


class LossTerms(NamedTuple):
    total: Tensor
    rmse: Tensor
    interatomic: Optional[Tensor]


def _check_counts(target: np.ndarray, recon: Tensor) -> None:
    if recon.ndim != 2 or recon.shape != target.shape:
        raise ShapeError("loss", target.shape, recon.shape)


def rmse_loss(target: Coords, recon: Tensor) -> Tensor:
    """sqrt(mean_i ‖x_i - x̃_i‖²) on inputs that are already superposed."""
    target_xyz = coords_of(target)
    _check_counts(target_xyz, recon)
    diff = ops.sub(Tensor(target_xyz.astype(recon.data.dtype)), recon)
    return ops.sqrt(ops.scale(ops.sum(ops.mul(diff, diff)), 1.0 / target_xyz.shape[0]))


def align_reconstruction(target: Coords, recon: Tensor) -> Tensor:
    """Superpose ``recon`` onto ``target``; the rigid transform is a constant for gradients."""
    target_xyz = coords_of(target)
    _check_counts(target_xyz, recon)
    if not np.all(np.isfinite(recon.data)):
        # the loss turns non-finite and the step is skipped upstream
        return recon
    rotation, translation, _ = kabsch(target_xyz, recon.data.astype(np.float64))
    dtype = recon.data.dtype
    rotated = ops.matmul(recon, Tensor(rotation.T.astype(dtype)))
    return ops.add_bias(rotated, Tensor(translation.astype(dtype)))


def aligned_rmse_loss(target: Coords, recon: Tensor) -> Tensor:
    return rmse_loss(target, align_reconstruction(target, recon))


def interatomic_distance_loss(target: Coords, recon: Tensor, groups: ResidueGroups) -> Tensor:
    """sqrt(Σ over ordered within-group pairs (‖x_i - x_j‖ - ‖x̃_i - x̃_j‖)²).

    Depends on distances only, so it needs no superposition.
    """
    target_xyz = coords_of(target)
    _check_counts(target_xyz, recon)
    i, j = groups.pair_i, groups.pair_j
    dtype = recon.data.dtype
    if i.size == 0:
        return custom_op(np.zeros((), dtype=dtype), (recon,), lambda g: (np.zeros_like(recon.data),), "interatomic")

    true_dist = np.linalg.norm(target_xyz[i] - target_xyz[j], axis=1)
    diff = recon.data[i] - recon.data[j]
    rec_dist = np.linalg.norm(diff, axis=1)
    residual = true_dist - rec_dist
    value = np.sqrt(np.sum(residual * residual))

    def backward(g):
        grad = np.zeros_like(recon.data)
        if value == 0:
            return (grad,)
        safe = np.where(rec_dist > 0, rec_dist, 1.0)
        coef = np.where(rec_dist > 0, -residual / (value * safe), 0.0) * g
        contrib = coef[:, None] * diff
        np.add.at(grad, i, contrib)
        np.add.at(grad, j, -contrib)
        return (grad,)

    return custom_op(np.asarray(value, dtype=dtype), (recon,), backward, "interatomic")


def total_loss(
    target: Coords,
    recon: Tensor,
    groups: ResidueGroups,
    config: LossConfig = LossConfig(),
) -> LossTerms:
    """Equal-weight sum of the superposed RMSE and the inter-atomic distance loss."""
    rmse = aligned_rmse_loss(target, recon) if config.align else rmse_loss(target, recon)
    if not config.use_interatomic:
        return LossTerms(rmse, rmse, None)
    inter = interatomic_distance_loss(target, recon, groups)
    total = ops.add(ops.scale(rmse, config.rmse_weight), ops.scale(inter, config.interatomic_weight))
    return LossTerms(total, rmse, inter)
