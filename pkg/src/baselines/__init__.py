from src.baselines.kmeans import VoronoiCodebook, kmeans_codebook, load_codebook, save_codebook
from src.baselines.voxel import (
    VoxelGrid,
    codec_error,
    monte_carlo_constant,
    uniform_voxel_error,
    voxel_count,
    voxel_count_curve,
    voxel_rms,
    voxel_rmsd,
)

__all__ = [
    "VoronoiCodebook",
    "kmeans_codebook",
    "load_codebook",
    "save_codebook",
    "VoxelGrid",
    "codec_error",
    "monte_carlo_constant",
    "uniform_voxel_error",
    "voxel_count",
    "voxel_count_curve",
    "voxel_rms",
    "voxel_rmsd",
]
