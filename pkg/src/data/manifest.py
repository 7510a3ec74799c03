"""Dataset manifests.

A manifest is JSON ``{"seed": int, "entries": [{"path", "split", "kind"}]}`` with
paths relative to the manifest file.
"""

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.data.pdb import parse_pdb, write_pdb
from src.data.synthetic import STYLES, synth_complex, synth_molecule, synth_polymer
from src.data.xyz import parse_xyz, write_xyz
from src.errors import ConfigError, ParseError
from src.geometry.pointcloud import PointCloud
from src.utils.logger import logger

SPLITS = ("train", "val", "test")
KINDS = ("protein", "rna", "molecule", "complex", "synthetic")


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    split: str = "train"
    kind: str = "synthetic"

    def __post_init__(self) -> None:
        if self.split not in SPLITS:
            raise ConfigError("manifest.split", f"unknown split {self.split!r}")
        if self.kind not in KINDS:
            raise ConfigError("manifest.kind", f"unknown kind {self.kind!r}")


@dataclass
class DatasetManifest:
    entries: List[ManifestEntry] = field(default_factory=list)
    seed: int = 0
    root: Path = Path(".")

    def __len__(self) -> int:
        return len(self.entries)

    def subset(self, split: str) -> "DatasetManifest":
        return replace(self, entries=[e for e in self.entries if e.split == split])

    def resolve(self, entry: ManifestEntry) -> Path:
        return self.root / entry.path

    def validate(self) -> None:
        seen: Dict[str, str] = {}
        for entry in self.entries:
            if entry.path in seen and seen[entry.path] != entry.split:
                raise ConfigError("manifest.entries", f"{entry.path} appears in both {seen[entry.path]} and {entry.split}")
            seen[entry.path] = entry.split
            if not self.resolve(entry).exists():
                raise FileNotFoundError(self.resolve(entry))

    def to_json(self) -> Dict:
        return {"seed": self.seed, "entries": [{"path": e.path, "split": e.split, "kind": e.kind} for e in self.entries]}


def load_manifest(path: Union[str, Path]) -> DatasetManifest:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError("manifest", f"{path}: invalid JSON ({e})") from e
    manifest = DatasetManifest(
        entries=[ManifestEntry(**entry) for entry in data.get("entries", [])],
        seed=int(data.get("seed", 0)),
        root=path.parent,
    )
    manifest.validate()
    return manifest


def save_manifest(manifest: DatasetManifest, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest.to_json(), indent=2) + "\n", encoding="utf-8")


def split(
    manifest: DatasetManifest,
    fractions: Sequence[float] = (0.8, 0.1, 0.1),
    seed: Optional[int] = None,
) -> Tuple[DatasetManifest, DatasetManifest, DatasetManifest]:
    """Deterministic shuffle, then contiguous train/val/test partitions."""
    if len(fractions) != 3 or any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-6:
        raise ConfigError("data.fractions", f"need three non-negative fractions summing to 1, got {list(fractions)}")
    seed = manifest.seed if seed is None else seed
    order = np.random.default_rng(seed).permutation(len(manifest.entries))
    n = len(order)
    n_train = int(round(fractions[0] * n))
    n_val = min(int(round(fractions[1] * n)), n - n_train)
    bounds = {"train": order[:n_train], "val": order[n_train:n_train + n_val], "test": order[n_train + n_val:]}

    parts = []
    for name in SPLITS:
        if len(bounds[name]) == 0:
            logger.warning(f"Split {name!r} is empty for a dataset of {n} entries")
        entries = [replace(manifest.entries[int(i)], split=name) for i in bounds[name]]
        parts.append(replace(manifest, entries=entries, seed=seed))
    return parts[0], parts[1], parts[2]


def load_structure(path: Union[str, Path], kind: Optional[str] = None) -> PointCloud:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    suffix = path.suffix.lower()
    if suffix == ".xyz":
        pc = parse_xyz(text, name=path.stem)
        return replace(pc, kind=kind) if kind else pc
    if suffix in (".pdb", ".ent"):
        return parse_pdb(text, kind=kind, name=path.stem)[0]
    raise ParseError(f"{path}: unsupported structure format {suffix!r}")


def write_structure(pc: PointCloud, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = write_xyz(pc) if path.suffix.lower() == ".xyz" else write_pdb(pc)
    path.write_text(text, encoding="utf-8")
    return path


def load_structures(manifest: DatasetManifest, split_name: Optional[str] = None) -> List[PointCloud]:
    entries = manifest.entries if split_name is None else manifest.subset(split_name).entries
    return [load_structure(manifest.resolve(e), e.kind) for e in entries]


def build_synthetic_dataset(
    root: Union[str, Path],
    n: int,
    residues: Tuple[int, int] = (8, 40),
    atoms_per_residue: Tuple[int, int] = (3, 6),
    seed: int = 0,
    fractions: Sequence[float] = (0.8, 0.1, 0.1),
    molecule_fraction: float = 0.0,
    complex_fraction: float = 0.0,
) -> DatasetManifest:
    """Write ``n`` generated structures plus ``manifest.json`` under ``root``."""
    if n < 1:
        raise ConfigError("data.n", "must be at least 1")
    if residues[0] < 1 or residues[1] < residues[0]:
        raise ConfigError("data.residues", f"bad size range {list(residues)}")
    root = Path(root)
    rng = np.random.default_rng(seed)
    entries = []
    for i in range(n):
        draw = rng.random()
        n_res = int(rng.integers(residues[0], residues[1] + 1))
        per_res = int(rng.integers(atoms_per_residue[0], atoms_per_residue[1] + 1))
        if draw < molecule_fraction:
            pc, kind, name = synth_molecule(rng), "molecule", f"mol_{i:05d}.xyz"
        elif draw < molecule_fraction + complex_fraction:
            pc, kind, name = synth_complex(rng, 2, max(1, n_res // 2), per_res), "complex", f"cplx_{i:05d}.pdb"
        else:
            style = STYLES[int(rng.integers(len(STYLES)))]
            pc, kind, name = synth_polymer(rng, n_res, per_res, style), "synthetic", f"poly_{i:05d}.pdb"
        write_structure(pc, root / "structures" / name)
        entries.append(ManifestEntry(path=f"structures/{name}", kind=kind))

    train, val, test = split(DatasetManifest(entries=entries, seed=seed, root=root), fractions, seed)
    manifest = DatasetManifest(entries=train.entries + val.entries + test.entries, seed=seed, root=root)
    save_manifest(manifest, root / "manifest.json")
    logger.info(f"Wrote {n} synthetic structures to {root} ({len(train)}/{len(val)}/{len(test)})")
    return manifest
