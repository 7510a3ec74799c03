from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from src.errors import ShapeError

BACKBONE_ATOMS = frozenset({"N", "CA", "C", "O", "P", "OP1", "OP2", "O5'", "C5'", "C4'", "O4'", "C3'", "O3'", "C2'", "O2'", "C1'"})


@dataclass
class PointCloud:
    """Heavy-atom coordinates (Å) with per-atom annotations, in file order."""

    coords: np.ndarray
    residue_index: Optional[np.ndarray] = None
    backbone: Optional[np.ndarray] = None
    chain_id: Optional[np.ndarray] = None
    atom_names: Optional[List[str]] = None
    elements: Optional[List[str]] = None
    kind: str = "synthetic"
    name: str = ""

    def __post_init__(self) -> None:
        self.coords = np.asarray(self.coords, dtype=np.float64).reshape(-1, 3)
        n = self.coords.shape[0]
        if n < 1:
            raise ShapeError("PointCloud", self.coords.shape, detail="needs at least one atom")
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("PointCloud coordinates must be finite")
        self.residue_index = _column(self.residue_index, n, np.zeros(n, dtype=np.int64), np.int64)
        self.backbone = _column(self.backbone, n, np.zeros(n, dtype=bool), bool)
        self.chain_id = _column(self.chain_id, n, np.zeros(n, dtype=np.int64), np.int64)
        for label, values in (("atom_names", self.atom_names), ("elements", self.elements)):
            if values is not None and len(values) != n:
                raise ShapeError(f"PointCloud.{label}", (len(values),), (n,))
        for chain in np.unique(self.chain_id):
            residues = self.residue_index[self.chain_id == chain]
            if np.any(np.diff(residues) < 0):
                raise ValueError(f"residue_index decreases within chain {int(chain)}")

    def __len__(self) -> int:
        return self.coords.shape[0]

    @property
    def n_atoms(self) -> int:
        return self.coords.shape[0]

    @property
    def centroid(self) -> np.ndarray:
        return self.coords.mean(axis=0)

    def with_coords(self, coords: np.ndarray) -> "PointCloud":
        return replace(self, coords=np.asarray(coords, dtype=np.float64).reshape(-1, 3))

    def take(self, indices: Sequence[int]) -> "PointCloud":
        idx = np.asarray(indices, dtype=np.int64)
        pick = (lambda values: None if values is None else [values[i] for i in idx])
        return PointCloud(
            coords=self.coords[idx],
            residue_index=self.residue_index[idx],
            backbone=self.backbone[idx],
            chain_id=self.chain_id[idx],
            atom_names=pick(self.atom_names),
            elements=pick(self.elements),
            kind=self.kind,
            name=self.name,
        )

    def delete(self, index: int) -> "PointCloud":
        keep = np.delete(np.arange(self.n_atoms), index)
        return self.take(keep)


def _column(values, n: int, default: np.ndarray, dtype) -> np.ndarray:
    if values is None:
        return default
    values = np.asarray(values, dtype=dtype).reshape(-1)
    if values.shape[0] != n:
        raise ShapeError("PointCloud annotation", values.shape, (n,))
    return values


def center(pc: PointCloud) -> PointCloud:
    """Translate so the centroid sits at the origin."""
    return pc.with_coords(pc.coords - pc.centroid)


def coords_of(value) -> np.ndarray:
    if isinstance(value, PointCloud):
        return value.coords
    return np.asarray(value, dtype=np.float64).reshape(-1, 3)


@dataclass
class ResidueGroups:
    """Ordered within-group atom pairs (i, j), i != j, for the distance loss."""

    pair_i: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    pair_j: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @classmethod
    def from_labels(cls, labels: np.ndarray) -> "ResidueGroups":
        labels = np.asarray(labels)
        pair_i, pair_j = [], []
        for label in np.unique(labels):
            members = np.flatnonzero(labels == label)
            if members.size < 2:
                continue
            ii, jj = np.meshgrid(members, members, indexing="ij")
            off_diagonal = ii != jj
            pair_i.append(ii[off_diagonal])
            pair_j.append(jj[off_diagonal])
        if not pair_i:
            return cls()
        return cls(np.concatenate(pair_i), np.concatenate(pair_j))

    @classmethod
    def from_pointcloud(cls, pc: PointCloud, single_group: Optional[bool] = None) -> "ResidueGroups":
        if single_group is None:
            single_group = pc.kind == "molecule"
        if single_group:
            return cls.from_labels(np.zeros(pc.n_atoms, dtype=np.int64))
        # chain ids are small integers, so this packs (chain, residue) into one label
        return cls.from_labels(pc.chain_id * (1 << 32) + pc.residue_index)

    @property
    def n_pairs(self) -> int:
        return int(self.pair_i.size)
