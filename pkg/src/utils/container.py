"""Self-describing binary container for named float tensors.

Layout: magic (4 bytes) | header length (u32 LE) | JSON header | payload.
The header holds the format version, a ``kind`` tag, free-form metadata, the
tensor table (name, shape, dtype, offset, nbytes) and the SHA-256 of the payload.
"""

import hashlib
import json
import struct
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

from src.errors import CheckpointError

MAGIC = b"ATKC"
FORMAT_VERSION = 1
_DTYPES = {"<f4": np.dtype("<f4"), "<f8": np.dtype("<f8")}


def write_container(
    path: Union[str, Path],
    kind: str,
    tensors: Dict[str, np.ndarray],
    meta: Dict[str, Any],
    dtype: str = "<f4",
) -> str:
    """Write tensors and metadata; returns the payload checksum."""
    table = []
    chunks = []
    offset = 0
    for name, array in tensors.items():
        raw = np.ascontiguousarray(array, dtype=_DTYPES[dtype]).tobytes()
        table.append({"name": name, "shape": list(np.shape(array)), "dtype": dtype, "offset": offset, "nbytes": len(raw)})
        chunks.append(raw)
        offset += len(raw)
    payload = b"".join(chunks)
    checksum = hashlib.sha256(payload).hexdigest()
    header = json.dumps(
        {"format_version": FORMAT_VERSION, "kind": kind, "meta": meta, "tensors": table, "checksum": checksum},
        sort_keys=True,
    ).encode("utf-8")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(payload)
    return checksum


def read_container(path: Union[str, Path], kind: str) -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]:
    blob = Path(path).read_bytes()
    if blob[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a container file")
    (header_len,) = struct.unpack("<I", blob[4:8])
    try:
        header = json.loads(blob[8:8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path}: unreadable header ({e})") from e
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format version {header.get('format_version')}")
    if header.get("kind") != kind:
        raise CheckpointError(f"{path}: expected a {kind} container, found {header.get('kind')}")

    payload = blob[8 + header_len:]
    if hashlib.sha256(payload).hexdigest() != header["checksum"]:
        raise CheckpointError(f"{path}: checksum mismatch")

    tensors = {}
    for entry in header["tensors"]:
        raw = payload[entry["offset"]:entry["offset"] + entry["nbytes"]]
        tensors[entry["name"]] = np.frombuffer(raw, dtype=_DTYPES[entry["dtype"]]).reshape(entry["shape"]).copy()
    meta = dict(header["meta"])
    meta["checksum"] = header["checksum"]
    return tensors, meta
