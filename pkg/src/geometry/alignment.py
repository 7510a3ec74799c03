from dataclasses import dataclass
from typing import Union

import numpy as np

from src.errors import ShapeError
from src.geometry.pointcloud import PointCloud, coords_of
from src.utils.logger import logger

Coords = Union[PointCloud, np.ndarray]


@dataclass
class AlignmentResult:
    rotation: np.ndarray
    translation: np.ndarray
    aligned: Coords
    rmse: float
    degenerate: bool = False

    def apply(self, coords: np.ndarray) -> np.ndarray:
        return coords @ self.rotation.T + self.translation


def kabsch(target: np.ndarray, mobile: np.ndarray):
    """Proper rotation R and translation t minimizing ‖target - (mobile Rᵀ + t)‖.

    SVD of the cross-covariance with the sign of the last singular direction flipped
    when needed so det(R) = +1. ``degenerate`` marks rank-deficient covariances
    (collinear or coincident points), where R is one of several minimizers.
    """
    if target.shape != mobile.shape:
        raise ShapeError("kabsch_align", target.shape, mobile.shape)
    target_mean = target.mean(axis=0)
    mobile_mean = mobile.mean(axis=0)
    covariance = (mobile - mobile_mean).T @ (target - target_mean)
    u, s, vt = np.linalg.svd(covariance)
    d = np.sign(np.linalg.det(vt.T @ u.T)) or 1.0
    rotation = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    translation = target_mean - rotation @ mobile_mean
    degenerate = bool(s[1] <= 1e-9 * max(s[0], 1e-12))
    return rotation, translation, degenerate


def kabsch_align(target: Coords, mobile: Coords) -> AlignmentResult:
    """Superpose ``mobile`` onto ``target`` using their positional correspondence."""
    target_xyz, mobile_xyz = coords_of(target), coords_of(mobile)
    rotation, translation, degenerate = kabsch(target_xyz, mobile_xyz)
    aligned_xyz = mobile_xyz @ rotation.T + translation
    if degenerate:
        logger.debug("Kabsch covariance is rank-deficient; rotation is not unique")
    rmse = float(np.sqrt(np.mean(np.sum((target_xyz - aligned_xyz) ** 2, axis=1))))
    aligned = mobile.with_coords(aligned_xyz) if isinstance(mobile, PointCloud) else aligned_xyz
    return AlignmentResult(rotation, translation, aligned, rmse, degenerate)


def aligned_rmsd(target: Coords, mobile: Coords) -> float:
    return kabsch_align(target, mobile).rmse


def subset_rmse(target: Coords, aligned: Coords, mask: np.ndarray) -> float:
    """RMSE over the masked atoms of an already-superposed pair (nan when the mask is empty)."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return float("nan")
    diff = coords_of(target)[mask] - coords_of(aligned)[mask]
    return float(np.sqrt(np.mean(np.sum(diff * diff, axis=1))))
