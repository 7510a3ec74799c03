"""Variable-length batches.

Structures are padded on the right into a dense [B×L×3] array with a boolean mask.
The model consumes each structure as its own unpadded slice, so pad positions never
enter the recurrence, either loss or the token statistics.
"""

from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from src.errors import ShapeError
from src.geometry.losses import LossConfig
from src.geometry.pointcloud import PointCloud
from src.model.tokenizer import TokenizerModel
from src.quantizer.fsq import TokenSequence
from src.tensor import ops
from src.tensor.core import Tensor


@dataclass
class Batch:
    coords: np.ndarray
    mask: np.ndarray
    templates: List[PointCloud]

    @property
    def lengths(self) -> np.ndarray:
        return self.mask.sum(axis=1)

    def __len__(self) -> int:
        return self.coords.shape[0]

    def structures(self) -> List[PointCloud]:
        """Unpadded clouds rebuilt from the masked rows."""
        return [
            template.with_coords(self.coords[row][self.mask[row]])
            for row, template in enumerate(self.templates)
        ]


class BatchLoss(NamedTuple):
    total: Tensor
    rmse: float
    interatomic: float
    tokens: List[TokenSequence]


def filter_by_length(structures: Sequence[PointCloud], max_seq_len: int) -> Tuple[List[PointCloud], int]:
    kept = [pc for pc in structures if pc.n_atoms <= max_seq_len]
    return kept, len(structures) - len(kept)


def make_batch(structures: Sequence[PointCloud], max_seq_len: int, batch_size: int) -> Batch:
    if not structures:
        raise ValueError("cannot build an empty batch")
    if len(structures) > batch_size:
        raise ShapeError("make_batch", (len(structures),), (batch_size,), detail="more structures than batch_size")
    longest = max(pc.n_atoms for pc in structures)
    if longest > max_seq_len:
        raise ShapeError("make_batch", (longest,), (max_seq_len,), detail="structure longer than max_seq_len")

    coords = np.zeros((len(structures), longest, 3))
    mask = np.zeros((len(structures), longest), dtype=bool)
    for row, pc in enumerate(structures):
        coords[row, :pc.n_atoms] = pc.coords
        mask[row, :pc.n_atoms] = True
    return Batch(coords=coords, mask=mask, templates=list(structures))


def batch_loss(model: TokenizerModel, batch: Batch, loss_config: LossConfig, scale: float = 1.0) -> BatchLoss:
    """Sum of per-structure losses, each multiplied by ``scale``."""
    total = None
    rmse = interatomic = 0.0
    tokens = []
    for pc in batch.structures():
        result = model.forward_loss(pc, loss_config)
        term = ops.scale(result.terms.total, scale)
        total = term if total is None else ops.add(total, term)
        rmse += result.terms.rmse.item()
        if result.terms.interatomic is not None:
            interatomic += result.terms.interatomic.item()
        tokens.append(result.tokens)
    return BatchLoss(total=total, rmse=rmse, interatomic=interatomic, tokens=tokens)
