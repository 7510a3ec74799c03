"""TM-score on backbone anchor atoms under the known atom correspondence.

Anchors are Cα for proteins and C3' for RNA. Superposition is the Kabsch fit on the
anchors; no alignment search is performed because reconstructions share atom
order with their inputs.

d₀ conventions:
  protein: d₀(L) = 1.24·(L - 15)^(1/3) - 1.8, floored at 0.5
  RNA:     d₀(L) = 0.6·(L - 0.5)^(1/2) - 2.5 for L ≥ 30;
           0.3 / 0.4 / 0.5 / 0.6 / 0.7 for L < 12 / 16 / 20 / 24 / 30
"""

import numpy as np

from src.errors import AnchorError
from src.geometry.alignment import kabsch
from src.geometry.pointcloud import PointCloud

PROTEIN = "protein_CA"
RNA = "rna_C3'"

ANCHOR_NAMES = {
    PROTEIN: ("CA",),
    RNA: ("C3'", "C3*"),
}


def d0_protein(length: int) -> float:
    if length <= 15:
        return 0.5
    return max(1.24 * (length - 15) ** (1.0 / 3.0) - 1.8, 0.5)


def d0_rna(length: int) -> float:
    if length < 12:
        return 0.3
    if length < 16:
        return 0.4
    if length < 20:
        return 0.5
    if length < 24:
        return 0.6
    if length < 30:
        return 0.7
    return 0.6 * np.sqrt(length - 0.5) - 2.5


D0 = {PROTEIN: d0_protein, RNA: d0_rna}


def anchor_indices(pc: PointCloud, mode: str) -> np.ndarray:
    if mode not in ANCHOR_NAMES:
        raise ValueError(f"unknown TM-score mode {mode!r}")
    if pc.atom_names is None:
        raise AnchorError(f"{pc.name or 'structure'} has no atom names to locate {mode} anchors")
    wanted = ANCHOR_NAMES[mode]
    indices = np.array([i for i, name in enumerate(pc.atom_names) if name.strip() in wanted], dtype=np.int64)
    if indices.size == 0:
        raise AnchorError(f"{pc.name or 'structure'} has no {'/'.join(wanted)} atoms")
    return indices


def score_from_distances(distances: np.ndarray, d0: float) -> float:
    return float(np.mean(1.0 / (1.0 + (distances / d0) ** 2)))


def tm_score_coords(target: np.ndarray, model: np.ndarray, d0: float) -> float:
    rotation, translation, _ = kabsch(target, model)
    superposed = model @ rotation.T + translation
    return score_from_distances(np.linalg.norm(target - superposed, axis=1), d0)


def tm_score(target: PointCloud, model: PointCloud, mode: str = PROTEIN) -> float:
    """TM-score in (0, 1]; 1.0 means identical anchor geometry."""
    indices = anchor_indices(target, mode)
    target_xyz = target.coords[indices]
    model_xyz = model.coords[indices]
    return tm_score_coords(target_xyz, model_xyz, D0[mode](indices.size))
