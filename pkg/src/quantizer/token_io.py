"""Token record files.

Binary (``.tok``): magic ``ATOK``, version (u16), record count (u32), then per record
a header (dims u16, levels u16×dims, length u32, atom count u32, compression u16)
followed by ``length`` ids as unsigned 16-bit little-endian integers.

Text (``.txt``): one ``record`` line per structure
(``record levels=4,4,4 length=N atoms=N k=1``) followed by a line of
whitespace-separated ids.
"""

import struct
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from src.errors import CodebookError, ParseError
from src.quantizer.fsq import FsqSpec, TokenSequence

MAGIC = b"ATOK"
VERSION = 1
MAX_BINARY_CODEBOOK = 1 << 16


def write_binary(path: Union[str, Path], records: Sequence[TokenSequence]) -> None:
    chunks = [MAGIC, struct.pack("<HI", VERSION, len(records))]
    for record in records:
        spec = record.spec
        if spec.codebook_size > MAX_BINARY_CODEBOOK:
            raise CodebookError(f"codebook of {spec.codebook_size} does not fit 16-bit ids")
        chunks.append(struct.pack("<H", spec.dims))
        chunks.append(struct.pack(f"<{spec.dims}H", *spec.levels))
        chunks.append(struct.pack("<IIH", len(record), record.n_atoms, record.compression))
        chunks.append(np.asarray(record.ids, dtype="<u2").tobytes())
    Path(path).write_bytes(b"".join(chunks))


def read_binary(path: Union[str, Path]) -> List[TokenSequence]:
    blob = Path(path).read_bytes()
    if blob[:4] != MAGIC:
        raise ParseError(f"{path}: not a token file")
    offset = 4

    def unpack(fmt: str) -> tuple:
        nonlocal offset
        size = struct.calcsize(fmt)
        if offset + size > len(blob):
            raise ParseError(f"{path}: truncated token file")
        values = struct.unpack_from(fmt, blob, offset)
        offset += size
        return values

    version, count = unpack("<HI")
    if version != VERSION:
        raise ParseError(f"{path}: unsupported token file version {version}")
    records = []
    for _ in range(count):
        (dims,) = unpack("<H")
        levels = unpack(f"<{dims}H")
        length, n_atoms, compression = unpack("<IIH")
        ids = np.array(unpack(f"<{length}H"), dtype=np.int64)
        records.append(TokenSequence(ids=ids, spec=FsqSpec(levels), n_atoms=n_atoms, compression=compression))
    if offset != len(blob):
        raise ParseError(f"{path}: {len(blob) - offset} trailing bytes after {count} records")
    return records


def write_text(path: Union[str, Path], records: Sequence[TokenSequence]) -> None:
    lines = []
    for record in records:
        levels = ",".join(str(level) for level in record.spec.levels)
        lines.append(f"record levels={levels} length={len(record)} atoms={record.n_atoms} k={record.compression}")
        lines.append(" ".join(str(int(i)) for i in record.ids))
    Path(path).write_text("\n".join(lines) + "\n")


def read_text(path: Union[str, Path]) -> List[TokenSequence]:
    lines = [line for line in Path(path).read_text().splitlines() if line.strip()]
    if len(lines) % 2:
        raise ParseError(f"{path}: record header without id line")
    records = []
    for header, body in zip(lines[0::2], lines[1::2]):
        fields = header.split()
        if not fields or fields[0] != "record":
            raise ParseError(f"{path}: expected a record line, got {header!r}")
        try:
            values = dict(item.split("=", 1) for item in fields[1:])
            spec = FsqSpec(tuple(int(level) for level in values["levels"].split(",")))
            length = int(values["length"])
            ids = np.array([int(tok) for tok in body.split()], dtype=np.int64)
            n_atoms, compression = int(values["atoms"]), int(values["k"])
        except (KeyError, ValueError) as e:
            raise ParseError(f"{path}: malformed record header {header!r}") from e
        if ids.size != length:
            raise ParseError(f"{path}: record declares {length} ids, found {ids.size}")
        records.append(TokenSequence(ids=ids, spec=spec, n_atoms=n_atoms, compression=compression))
    return records


def write_tokens(path: Union[str, Path], records: Sequence[TokenSequence]) -> None:
    if str(path).endswith(".txt"):
        write_text(path, records)
    else:
        write_binary(path, records)


def read_tokens(path: Union[str, Path]) -> List[TokenSequence]:
    if str(path).endswith(".txt"):
        return read_text(path)
    return read_binary(path)
