"""Finite scalar quantization.

Each latent dimension i is squashed into [0, levels[i] - 1] and rounded, so the
codebook is the implicit lattice of integer tuples. Token ids are the mixed-radix
index of the tuple, id = Σ_i code[i] · Π_{j<i} levels[j], which is a bijection
between tuples and [0, codebook_size).
"""

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from src.errors import CodebookError, SpecMismatchError
from src.tensor import ops
from src.tensor.core import Tensor, default_dtype


@dataclass(frozen=True)
class FsqSpec:
    levels: Tuple[int, ...] = (4, 4, 4, 4, 4, 4)

    def __post_init__(self) -> None:
        levels = tuple(int(level) for level in self.levels)
        if not levels:
            raise CodebookError("FSQ needs at least one dimension")
        if any(level < 2 for level in levels):
            raise CodebookError(f"every FSQ dimension needs at least 2 levels, got {list(levels)}")
        object.__setattr__(self, "levels", levels)

    @classmethod
    def uniform(cls, levels: int = 4, dims: int = 6) -> "FsqSpec":
        return cls(levels=(levels,) * dims)

    @property
    def dims(self) -> int:
        return len(self.levels)

    @property
    def codebook_size(self) -> int:
        return int(np.prod(self.levels, dtype=np.int64))

    @property
    def basis(self) -> np.ndarray:
        return np.cumprod((1,) + self.levels[:-1], dtype=np.int64)

    @property
    def half_width(self) -> np.ndarray:
        return (np.asarray(self.levels, dtype=np.float64) - 1.0) / 2.0


@dataclass
class TokenSequence:
    """Token ids of one structure plus what decoding needs to restore its length."""

    ids: np.ndarray
    spec: FsqSpec = field(default_factory=FsqSpec)
    n_atoms: int = 0
    compression: int = 1

    def __post_init__(self) -> None:
        self.ids = np.asarray(self.ids, dtype=np.int64).reshape(-1)
        if self.ids.size and (self.ids.min() < 0 or self.ids.max() >= self.spec.codebook_size):
            raise CodebookError(f"token id outside [0, {self.spec.codebook_size})")
        if not self.n_atoms:
            self.n_atoms = int(self.ids.size * self.compression)

    def __len__(self) -> int:
        return int(self.ids.size)

    def hamming(self, other: "TokenSequence") -> int:
        if len(self) != len(other):
            raise CodebookError("Hamming distance needs equal lengths")
        return int(np.count_nonzero(self.ids != other.ids))


def codes_to_ids(codes: np.ndarray, spec: FsqSpec) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    if codes.shape[-1] != spec.dims:
        raise CodebookError(f"code tuples have {codes.shape[-1]} entries, spec has {spec.dims}")
    levels = np.asarray(spec.levels, dtype=np.int64)
    if np.any(codes < 0) or np.any(codes >= levels):
        raise CodebookError(f"code coordinate outside levels {list(spec.levels)}")
    return (codes * spec.basis).sum(axis=-1)


def ids_to_codes(ids: np.ndarray, spec: FsqSpec) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.int64)
    if np.any(ids < 0) or np.any(ids >= spec.codebook_size):
        raise CodebookError(f"token id outside [0, {spec.codebook_size})")
    levels = np.asarray(spec.levels, dtype=np.int64)
    return (ids[..., None] // spec.basis) % levels


def code_to_id(coords: Sequence[int], spec: FsqSpec) -> int:
    return int(codes_to_ids(np.asarray(coords)[None], spec)[0])


def id_to_code(token_id: int, spec: FsqSpec) -> Tuple[int, ...]:
    return tuple(int(c) for c in ids_to_codes(np.asarray([token_id]), spec)[0])


def _row(values: np.ndarray, like: Tensor) -> Tensor:
    return Tensor(np.asarray(values, dtype=like.data.dtype))


def bound(z: Tensor, spec: FsqSpec) -> Tensor:
    """z ↦ ((L-1)/2)·(tanh z + 1), landing in [0, L-1] per dimension."""
    if z.ndim != 2 or z.shape[1] != spec.dims:
        raise CodebookError(f"latent width {z.shape} does not match {spec.dims} FSQ dimensions")
    return ops.mul_row(ops.add(ops.tanh(z), 1.0), _row(spec.half_width, z))


def quantize(z_bounded: Tensor, spec: FsqSpec) -> Tuple[Tensor, TokenSequence]:
    """Round to the lattice (ties to even); gradients pass straight through."""
    z_q = ops.round_ste(z_bounded)
    levels = np.asarray(spec.levels) - 1
    codes = np.clip(z_q.data.astype(np.int64), 0, levels)
    tokens = TokenSequence(ids=codes_to_ids(codes, spec), spec=spec)
    return z_q, tokens


def codes_to_latent(z_q: Tensor, spec: FsqSpec) -> Tensor:
    """Affine map of lattice values onto [-1, 1], the decoder's input scale."""
    half = spec.half_width
    centered = ops.add_bias(z_q, _row(-half, z_q))
    return ops.mul_row(centered, _row(1.0 / half, z_q))


def tokens_to_latent(tokens: TokenSequence, spec: FsqSpec) -> Tensor:
    if tokens.spec.levels != spec.levels:
        raise SpecMismatchError(spec.levels, tokens.spec.levels)
    codes = ids_to_codes(tokens.ids, spec)
    return codes_to_latent(Tensor(codes.astype(default_dtype())), spec)


def codebook_usage(token_stream: Iterable[Union[TokenSequence, np.ndarray, int]], codebook_size: int) -> float:
    """Fraction of the codebook that occurs at least once in the stream."""
    seen = set()
    empty = True
    for item in token_stream:
        ids = item.ids if isinstance(item, TokenSequence) else np.atleast_1d(np.asarray(item))
        if ids.size:
            empty = False
            seen.update(np.unique(ids).tolist())
    if empty:
        raise ValueError("codebook usage of an empty token stream")
    return len(seen) / float(codebook_size)
