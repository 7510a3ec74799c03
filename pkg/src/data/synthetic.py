"""Seeded generators for desk-scale training data.

Polymers carry one backbone atom per residue on a helical or self-avoiding coil
trace, with side atoms hanging off it; molecules are compact bonded clusters.
"""

from typing import List, Optional

import numpy as np

from src.errors import SamplingError
from src.geometry.pointcloud import PointCloud, center
from src.geometry.rotations import random_rotation

HELIX_RISE = 1.5
HELIX_RADIUS = 2.3
HELIX_TURN = np.deg2rad(100.0)
COIL_STEP = 3.8
MIN_BACKBONE_DISTANCE = 2.5
SIDE_BOND = (1.0, 1.8)
MAX_RETRIES = 10_000
STYLES = ("helix", "coil", "mixed")
SIDE_NAMES = ("CB", "CG", "CD", "CE", "CZ", "CH")
MOLECULE_ELEMENTS = ("C", "C", "C", "N", "O")


def _unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def helix_trace(n: int) -> np.ndarray:
    t = np.arange(n)
    angle = t * HELIX_TURN
    return np.stack([HELIX_RADIUS * np.cos(angle), HELIX_RADIUS * np.sin(angle), HELIX_RISE * t], axis=1)


class _Trace:
    """Backbone points grown under the minimum-distance constraint."""

    def __init__(self, rng: np.random.Generator) -> None:
        self.rng = rng
        self.points: List[np.ndarray] = []
        self.retries = 0

    def _fits(self, candidates: np.ndarray) -> bool:
        if not self.points:
            return True
        existing = np.asarray(self.points)
        d = np.linalg.norm(candidates[:, None, :] - existing[None, :, :], axis=2)
        return bool(d.min() >= MIN_BACKBONE_DISTANCE)

    def _retry(self) -> None:
        self.retries += 1
        if self.retries > MAX_RETRIES:
            raise SamplingError(f"self-avoiding trace needed more than {MAX_RETRIES} retries")

    def start(self) -> np.ndarray:
        return self.points[-1] + COIL_STEP * _unit(self.rng) if self.points else np.zeros(3)

    def add_coil(self, n: int) -> None:
        placed = 0
        while placed < n:
            candidate = self.start()[None, :]
            if self._fits(candidate):
                self.points.append(candidate[0])
                placed += 1
            else:
                self._retry()

    def add_helix(self, n: int) -> None:
        local = helix_trace(n)
        while True:
            segment = (local - local[0]) @ random_rotation(self.rng).T + self.start()
            if self._fits(segment):
                self.points.extend(segment)
                return
            self._retry()


def _side_name(k: int) -> str:
    return SIDE_NAMES[k] if k < len(SIDE_NAMES) else f"CX{k}"


def _side_chain(rng: np.random.Generator, anchor: np.ndarray, outward: np.ndarray, count: int) -> np.ndarray:
    atoms = []
    previous = anchor
    for _ in range(count):
        direction = outward + 0.6 * _unit(rng)
        direction /= np.linalg.norm(direction)
        previous = previous + rng.uniform(*SIDE_BOND) * direction
        atoms.append(previous)
    return np.asarray(atoms).reshape(-1, 3)


def synth_polymer(
    rng: np.random.Generator,
    n_residues: int,
    atoms_per_residue: int = 4,
    style: str = "helix",
    chain: int = 0,
) -> PointCloud:
    if n_residues < 1:
        raise ValueError("n_residues must be at least 1")
    if atoms_per_residue < 1:
        raise ValueError("atoms_per_residue must be at least 1")
    if style not in STYLES:
        raise ValueError(f"style must be one of {STYLES}")

    trace = _Trace(rng)
    if style == "helix":
        trace.add_helix(n_residues)
    elif style == "coil":
        trace.add_coil(n_residues)
    else:
        while len(trace.points) < n_residues:
            length = min(int(rng.integers(4, 13)), n_residues - len(trace.points))
            if rng.random() < 0.5:
                trace.add_helix(length)
            else:
                trace.add_coil(length)
    backbone = np.asarray(trace.points)
    centroid = backbone.mean(axis=0)

    coords, residues, flags, names = [], [], [], []
    for r, anchor in enumerate(backbone):
        outward = anchor - centroid
        norm = np.linalg.norm(outward)
        outward = outward / norm if norm > 1e-9 else _unit(rng)
        side = _side_chain(rng, anchor, outward, atoms_per_residue - 1)
        coords.append(anchor[None, :])
        coords.append(side)
        residues.extend([r] * atoms_per_residue)
        flags.extend([True] + [False] * (atoms_per_residue - 1))
        names.extend(["CA"] + [_side_name(k) for k in range(atoms_per_residue - 1)])

    n = n_residues * atoms_per_residue
    return PointCloud(
        coords=np.vstack(coords),
        residue_index=np.asarray(residues),
        backbone=np.asarray(flags),
        chain_id=np.full(n, chain),
        atom_names=names,
        elements=["C"] * n,
        kind="synthetic",
    )


def synth_complex(
    rng: np.random.Generator,
    n_chains: int,
    n_residues: int,
    atoms_per_residue: int = 4,
    style: str = "mixed",
    gap: float = 6.0,
) -> PointCloud:
    """Chains generated independently and laid side by side along x."""
    if n_chains < 1:
        raise ValueError("n_chains must be at least 1")
    chains = [center(synth_polymer(rng, n_residues, atoms_per_residue, style, chain=c)) for c in range(n_chains)]
    offset = 0.0
    coords = []
    for pc in chains:
        radius = float(np.linalg.norm(pc.coords, axis=1).max())
        offset += radius
        coords.append(pc.coords + np.array([offset, 0.0, 0.0]))
        offset += radius + gap

    merged = PointCloud(
        coords=np.vstack(coords),
        residue_index=np.concatenate([pc.residue_index for pc in chains]),
        backbone=np.concatenate([pc.backbone for pc in chains]),
        chain_id=np.concatenate([pc.chain_id for pc in chains]),
        atom_names=[n for pc in chains for n in pc.atom_names],
        elements=[e for pc in chains for e in pc.elements],
        kind="complex",
    )
    return center(merged)


def synth_molecule(rng: np.random.Generator, n_atoms: Optional[int] = None, bond=(1.2, 1.6)) -> PointCloud:
    """Bonded cluster grown atom by atom, valence capped at four."""
    if n_atoms is None:
        n_atoms = int(rng.integers(8, 28))
    if n_atoms < 1:
        raise ValueError("n_atoms must be at least 1")
    coords = [np.zeros(3)]
    degree = [0]
    retries = 0
    while len(coords) < n_atoms:
        open_sites = [i for i, d in enumerate(degree) if d < 4]
        parent = open_sites[int(rng.integers(len(open_sites)))]
        candidate = coords[parent] + rng.uniform(*bond) * _unit(rng)
        distances = np.linalg.norm(np.asarray(coords) - candidate, axis=1)
        distances[parent] = np.inf
        if distances.min() >= bond[1] * 1.3:
            coords.append(candidate)
            degree.append(1)
            degree[parent] += 1
        else:
            retries += 1
            if retries > MAX_RETRIES:
                raise SamplingError(f"molecule growth needed more than {MAX_RETRIES} retries")

    elements = [MOLECULE_ELEMENTS[int(i)] for i in rng.integers(len(MOLECULE_ELEMENTS), size=n_atoms)]
    return center(PointCloud(
        coords=np.asarray(coords),
        atom_names=[f"{el}{i + 1}" for i, el in enumerate(elements)],
        elements=elements,
        kind="molecule",
    ))
