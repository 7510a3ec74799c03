"""Uniform voxel codec and its analytic error model.

A voxel of side a replaces every point by the voxel centre. The mean distance to the
centre of a unit cube is ≈0.4803, so the codec's mean error is ≈0.48·a; the true
RMS distance is exactly a/2.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence

import numpy as np

from src.errors import AtomTokensError
from src.utils.logger import logger

VOXEL_CONSTANT = 0.48
MC_SAMPLES = 10_000_000
EXEMPLAR_SIDES = (10.0, 60.0, 80.0)


@lru_cache(maxsize=None)
def monte_carlo_constant(samples: int = MC_SAMPLES, seed: int = 0, chunk: int = 1_000_000) -> float:
    """Mean distance from the centre of a unit cube to a uniform point inside it."""
    rng = np.random.default_rng(seed)
    total = 0.0
    remaining = samples
    while remaining > 0:
        n = min(chunk, remaining)
        points = rng.uniform(-0.5, 0.5, size=(n, 3))
        total += float(np.sqrt(np.sum(points * points, axis=1)).sum())
        remaining -= n
    constant = total / samples
    if abs(constant - VOXEL_CONSTANT) > 0.01 * VOXEL_CONSTANT:
        raise AtomTokensError(f"voxel constant {constant:.5f} is not within 1% of {VOXEL_CONSTANT}")
    return constant


def voxel_rmsd(a: float, samples: int = MC_SAMPLES) -> float:
    if a <= 0:
        raise ValueError("voxel size must be positive")
    return monte_carlo_constant(samples) * a


def voxel_rms(a: float) -> float:
    """Root-mean-square distance to the voxel centre, exactly a/2."""
    if a <= 0:
        raise ValueError("voxel size must be positive")
    return 0.5 * a


def voxel_count(side: float, target_rmsd: float) -> int:
    """(0.48·A / rmsd)³ voxels, rounded to the nearest integer."""
    if side <= 0 or target_rmsd <= 0:
        raise ValueError("side and target_rmsd must be positive")
    return int(round((VOXEL_CONSTANT * side / target_rmsd) ** 3))


def voxel_count_curve(sides: Sequence[float] = EXEMPLAR_SIDES, rmsd_values: Sequence[float] = (0.2, 0.5, 1.0, 2.0)) -> List[Dict[str, float]]:
    return [
        {"side": float(side), "rmsd": float(rmsd), "voxel_count": voxel_count(side, rmsd)}
        for side in sides
        for rmsd in rmsd_values
    ]


@dataclass(frozen=True)
class VoxelGrid:
    side: float
    voxel: float

    def __post_init__(self) -> None:
        if self.voxel <= 0:
            raise ValueError("voxel size must be positive")
        if self.side < self.voxel:
            raise ValueError("cube side must be at least one voxel")

    @property
    def per_axis(self) -> int:
        return int(math.ceil(self.side / self.voxel - 1e-9))

    @property
    def count(self) -> int:
        return self.per_axis ** 3

    @property
    def origin(self) -> float:
        return -self.side / 2.0

    def encode(self, coords: np.ndarray) -> np.ndarray:
        """Mixed-radix voxel ids (x varies fastest) for points in the cube centred at the origin."""
        coords = np.asarray(coords, dtype=np.float64).reshape(-1, 3)
        index = np.floor((coords - self.origin) / self.voxel).astype(np.int64)
        outside = np.any((index < 0) | (index >= self.per_axis), axis=1)
        if outside.any():
            logger.warning(f"Clamped {int(outside.sum())} points outside the {self.side:g} Å cube")
            index = np.clip(index, 0, self.per_axis - 1)
        n = self.per_axis
        return index[:, 0] + n * index[:, 1] + n * n * index[:, 2]

    def decode(self, ids: np.ndarray) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.int64)
        n = self.per_axis
        index = np.stack([ids % n, (ids // n) % n, ids // (n * n)], axis=1)
        return self.origin + (index + 0.5) * self.voxel


@dataclass
class CodecError:
    mean_distance: float
    rms: float


def codec_error(original: np.ndarray, decoded: np.ndarray) -> CodecError:
    distances = np.linalg.norm(np.asarray(original) - np.asarray(decoded), axis=1)
    return CodecError(mean_distance=float(distances.mean()), rms=float(np.sqrt(np.mean(distances ** 2))))


def uniform_voxel_error(grid: VoxelGrid, n_points: int = 100_000, seed: int = 0) -> CodecError:
    """Codec error on points drawn uniformly over whole voxels of the grid."""
    rng = np.random.default_rng(seed)
    extent = grid.per_axis * grid.voxel
    points = grid.origin + rng.uniform(0.0, extent, size=(n_points, 3))
    return codec_error(points, grid.decode(grid.encode(points)))
