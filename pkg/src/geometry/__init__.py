from src.geometry.alignment import AlignmentResult, aligned_rmsd, kabsch, kabsch_align, subset_rmse
from src.geometry.losses import (
    LossConfig,
    LossTerms,
    aligned_rmse_loss,
    interatomic_distance_loss,
    rmse_loss,
    total_loss,
)
from src.geometry.pointcloud import PointCloud, ResidueGroups, center
from src.geometry.rotations import axis_rotation, random_rotation, rotate
from src.geometry.tm_score import PROTEIN, RNA, tm_score

__all__ = [
    "AlignmentResult",
    "aligned_rmsd",
    "kabsch",
    "kabsch_align",
    "subset_rmse",
    "LossConfig",
    "LossTerms",
    "aligned_rmse_loss",
    "interatomic_distance_loss",
    "rmse_loss",
    "total_loss",
    "PointCloud",
    "ResidueGroups",
    "center",
    "axis_rotation",
    "random_rotation",
    "rotate",
    "PROTEIN",
    "RNA",
    "tm_score",
]
