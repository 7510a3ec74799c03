from src.data.manifest import (
    DatasetManifest,
    ManifestEntry,
    build_synthetic_dataset,
    load_manifest,
    load_structure,
    load_structures,
    save_manifest,
    split,
    write_structure,
)
from src.data.pdb import PdbParseResult, parse_pdb, read_pdb, write_pdb
from src.data.synthetic import synth_complex, synth_molecule, synth_polymer
from src.data.xyz import parse_xyz, write_xyz

__all__ = [
    "DatasetManifest",
    "ManifestEntry",
    "build_synthetic_dataset",
    "load_manifest",
    "load_structure",
    "load_structures",
    "save_manifest",
    "split",
    "write_structure",
    "PdbParseResult",
    "parse_pdb",
    "read_pdb",
    "write_pdb",
    "synth_complex",
    "synth_molecule",
    "synth_polymer",
    "parse_xyz",
    "write_xyz",
]
