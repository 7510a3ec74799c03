from typing import List, Sequence

import numpy as np

from src.analysis.report import SweepReport
from src.geometry.alignment import kabsch_align
from src.geometry.pointcloud import PointCloud, center
from src.geometry.rotations import AXES, axis_rotation, rotate
from src.model.tokenizer import TokenizerModel
from src.quantizer.fsq import TokenSequence


def rotated(pc: PointCloud, axis: str, angle: float) -> PointCloud:
    centered = center(pc)
    return centered.with_coords(rotate(centered.coords, axis_rotation(axis, angle)))


def tokens_at_angle(model: TokenizerModel, pc: PointCloud, axis: str, angle: float) -> TokenSequence:
    return model.tokenize(rotated(pc, axis, angle), center_input=False)


def rotation_sweep(model: TokenizerModel, pc: PointCloud, axis: str = "z", n_angles: int = 64) -> SweepReport:
    """Tokens and aligned reconstruction RMSE at θ = 2πj/n for j = 0..n-1."""
    if axis not in AXES:
        raise ValueError(f"axis must be one of {sorted(AXES)}")
    if n_angles < 1:
        raise ValueError("n_angles must be at least 1")
    report = SweepReport(name=f"rotation_{axis}", variable="angle", meta={"axis": axis, "structure": pc.name})
    reference = None
    for j in range(n_angles):
        angle = 2.0 * np.pi * j / n_angles
        target = rotated(pc, axis, angle)
        tokens = model.tokenize(target, center_input=False)
        decoded = model.decode(tokens)
        if reference is None:
            reference = tokens
        report.add(
            angle=angle,
            rmse=kabsch_align(target, decoded).rmse,
            changed_vs_start=tokens.hamming(reference),
            tokens=tokens.ids.tolist(),
        )
    rmse = np.asarray(report.column("rmse"))
    report.meta.update({"rmse_spread": float(rmse.max() - rmse.min()), "rmse_std": float(rmse.std())})
    return report


def center_distance_profile(
    model: TokenizerModel,
    structures: Sequence[PointCloud],
    n_points: int = 10_000,
    seed: int = 0,
) -> SweepReport:
    """Per-atom error after whole-structure superposition against distance to the centroid."""
    distances: List[np.ndarray] = []
    errors: List[np.ndarray] = []
    for pc in structures:
        target = center(pc)
        aligned = kabsch_align(target, model.reconstruct(pc)).aligned
        distances.append(np.linalg.norm(target.coords, axis=1))
        errors.append(np.linalg.norm(target.coords - aligned.coords, axis=1))
    distance = np.concatenate(distances)
    error = np.concatenate(errors)

    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(distance.size, size=min(n_points, distance.size), replace=False))
    report = SweepReport(name="center_distance", variable="distance", meta={"seed": seed, "n_structures": len(structures)})
    for i in picks:
        report.add(distance=float(distance[i]), error=float(error[i]))
    return report


def binned_means(report: SweepReport, n_bins: int = 10) -> SweepReport:
    distance = np.asarray(report.column("distance"), dtype=np.float64)
    error = np.asarray(report.column("error"), dtype=np.float64)
    edges = np.linspace(distance.min(), distance.max(), n_bins + 1)
    which = np.clip(np.digitize(distance, edges) - 1, 0, n_bins - 1)
    binned = SweepReport(name=f"{report.name}_binned", variable="bin_center", meta=dict(report.meta))
    for b in range(n_bins):
        members = which == b
        if members.any():
            binned.add(bin_center=float(0.5 * (edges[b] + edges[b + 1])), mean_error=float(error[members].mean()), count=int(members.sum()))
    return binned
