import numpy as np

from src.data.pdb import HYDROGENS
from src.errors import ParseError
from src.geometry.pointcloud import PointCloud


def parse_xyz(text: str, name: str = "") -> PointCloud:
    """Count-header XYZ conformer; heavy atoms only, one residue group."""
    lines = text.splitlines()
    label = name or "XYZ text"
    if not lines:
        raise ParseError(f"{label}: empty file")
    try:
        count = int(lines[0].split()[0])
    except (IndexError, ValueError) as e:
        raise ParseError(f"{label}: bad atom count line {lines[0]!r}") from e
    body = [line for line in lines[2:] if line.strip()]
    if len(body) != count:
        raise ParseError(f"{label}: header declares {count} atoms, body has {len(body)}")

    elements, coords = [], []
    for line in body:
        fields = line.split()
        if len(fields) < 4:
            raise ParseError(f"{label}: malformed atom line {line!r}")
        element = fields[0].capitalize()
        if element.upper() in HYDROGENS:
            continue
        try:
            coords.append([float(v) for v in fields[1:4]])
        except ValueError as e:
            raise ParseError(f"{label}: malformed coordinates in {line!r}") from e
        elements.append(element)
    if not coords:
        raise ParseError(f"{label}: no heavy atoms")

    return PointCloud(
        coords=np.array(coords),
        atom_names=[f"{el}{i + 1}" for i, el in enumerate(elements)],
        elements=elements,
        kind="molecule",
        name=name,
    )


def write_xyz(pc: PointCloud, comment: str = "") -> str:
    elements = pc.elements or ["C"] * pc.n_atoms
    lines = [str(pc.n_atoms), comment or pc.name]
    for element, (x, y, z) in zip(elements, pc.coords):
        lines.append(f"{element:<2} {x:14.8f} {y:14.8f} {z:14.8f}")
    return "\n".join(lines) + "\n"
