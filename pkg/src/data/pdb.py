"""Fixed-column PDB reading and writing (ATOM/HETATM/MODEL/ENDMDL subset)."""

import string
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.errors import ParseError
from src.geometry.pointcloud import BACKBONE_ATOMS, PointCloud
from src.utils.logger import logger

HYDROGENS = frozenset({"H", "D"})
WATERS = frozenset({"HOH", "WAT", "DOD"})
CHAIN_LETTERS = string.ascii_uppercase + string.ascii_lowercase + string.digits


@dataclass
class AtomRecord:
    hetero: bool
    name: str
    altloc: str
    res_name: str
    chain: str
    res_seq: int
    icode: str
    xyz: Tuple[float, float, float]
    occupancy: float
    element: str


@dataclass
class PdbParseResult:
    models: List[PointCloud]
    skipped: int


def _element(line: str, name: str) -> str:
    element = line[76:78].strip() if len(line) >= 78 else ""
    if element:
        return element.upper()
    letters = name.lstrip(string.digits)
    return letters[:1].upper()


def parse_atom_line(line: str) -> AtomRecord:
    """One ATOM/HETATM line; ValueError when a required column is malformed."""
    if len(line) < 54:
        raise ValueError("truncated record")
    name = line[12:16].strip()
    if not name:
        raise ValueError("missing atom name")
    occupancy_text = line[54:60].strip()
    return AtomRecord(
        hetero=line.startswith("HETATM"),
        name=name,
        altloc=line[16].strip(),
        res_name=line[17:20].strip(),
        chain=line[21].strip(),
        res_seq=int(line[22:26]),
        icode=line[26].strip(),
        xyz=(float(line[30:38]), float(line[38:46]), float(line[46:54])),
        occupancy=float(occupancy_text) if occupancy_text else 1.0,
        element=_element(line, name),
    )


def _resolve_altlocs(records: List[AtomRecord]) -> List[AtomRecord]:
    """Keep one conformer per atom: highest occupancy, first on ties, in file order.

    Only records with an alternate-location indicator compete; blank ones are kept as they are.
    """
    best: Dict[tuple, int] = {}
    order = []
    for index, record in enumerate(records):
        key = (record.chain, record.res_seq, record.icode, record.res_name, record.name)
        if not record.altloc:
            key = key + (index,)
        if key not in best:
            best[key] = index
            order.append(key)
        elif record.occupancy > records[best[key]].occupancy:
            best[key] = index
    return [records[best[key]] for key in order]


def _infer_kind(records: List[AtomRecord], n_chains: int) -> str:
    names = {r.name for r in records}
    if n_chains > 1:
        return "complex"
    if "CA" in names and any(not r.hetero for r in records):
        return "protein"
    if "C3'" in names or "C3*" in names:
        return "rna"
    return "molecule"


def _to_pointcloud(records: List[AtomRecord], kind: Optional[str], name: str) -> PointCloud:
    records = _resolve_altlocs(records)
    chains: Dict[str, int] = {}
    residue_index = []
    last_residue: Dict[str, tuple] = {}
    counters: Dict[str, int] = {}
    for record in records:
        chains.setdefault(record.chain, len(chains))
        residue = (record.res_seq, record.icode, record.res_name)
        if record.chain not in counters:
            counters[record.chain] = 0
        elif last_residue[record.chain] != residue:
            counters[record.chain] += 1
        last_residue[record.chain] = residue
        residue_index.append(counters[record.chain])

    return PointCloud(
        coords=np.array([r.xyz for r in records], dtype=np.float64),
        residue_index=np.array(residue_index, dtype=np.int64),
        backbone=np.array([(not r.hetero) and r.name in BACKBONE_ATOMS for r in records], dtype=bool),
        chain_id=np.array([chains[r.chain] for r in records], dtype=np.int64),
        atom_names=[r.name for r in records],
        elements=[r.element for r in records],
        kind=kind or _infer_kind(records, len(chains)),
        name=name,
    )


def read_pdb(text: str, kind: Optional[str] = None, name: str = "") -> PdbParseResult:
    models: List[List[AtomRecord]] = []
    current: List[AtomRecord] = []
    skipped = 0
    for line in text.splitlines():
        record_type = line[:6].strip()
        if record_type == "MODEL":
            if current:
                models.append(current)
            current = []
        elif record_type == "ENDMDL":
            models.append(current)
            current = []
        elif record_type in ("ATOM", "HETATM"):
            try:
                record = parse_atom_line(line)
            except ValueError:
                skipped += 1
                continue
            if record.element in HYDROGENS or record.res_name in WATERS:
                continue
            current.append(record)
    if current:
        models.append(current)

    models = [m for m in models if m]
    if not models:
        raise ParseError(f"{name or 'PDB text'}: no heavy atoms found")
    if skipped:
        logger.warning(f"{name or 'PDB text'}: skipped {skipped} malformed records")
    return PdbParseResult([_to_pointcloud(m, kind, name) for m in models], skipped)


def parse_pdb(text: str, kind: Optional[str] = None, name: str = "") -> List[PointCloud]:
    """Heavy-atom point clouds, one per MODEL block."""
    return read_pdb(text, kind, name).models


def write_pdb(pc: PointCloud, res_name: str = "UNK") -> str:
    lines = []
    names = pc.atom_names or ["CA" if bb else "C" for bb in pc.backbone]
    elements = pc.elements or [n[:1] for n in names]
    for i in range(pc.n_atoms):
        name = names[i]
        padded = name if len(name) >= 4 else f" {name:<3}"
        chain = CHAIN_LETTERS[int(pc.chain_id[i]) % len(CHAIN_LETTERS)]
        res_seq = (int(pc.residue_index[i]) + 1) % 10000
        x, y, z = pc.coords[i]
        lines.append(
            f"{'ATOM':<6}{(i + 1) % 100000:>5} {padded:<4} {res_name:>3} {chain}{res_seq:>4}    "
            f"{x:8.3f}{y:8.3f}{z:8.3f}{1.0:6.2f}{0.0:6.2f}          {elements[i]:>2}"
        )
    lines.append("END")
    return "\n".join(lines) + "\n"
