from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Union

import numpy as np

from src.errors import ShapeError
from src.utils.container import read_container, write_container
from src.utils.logger import logger

KIND = "codebook"
CHUNK = 16_384


@dataclass
class VoronoiCodebook:
    centroids: np.ndarray
    history: List[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.centroids = np.asarray(self.centroids, dtype=np.float64).reshape(-1, 3)
        if self.centroids.shape[0] < 1:
            raise ShapeError("VoronoiCodebook", self.centroids.shape, detail="needs at least one centroid")
        if not np.all(np.isfinite(self.centroids)):
            raise ValueError("centroids must be finite")

    @property
    def size(self) -> int:
        return self.centroids.shape[0]

    def encode(self, coords: np.ndarray) -> np.ndarray:
        """Nearest-centroid ids; ties go to the lowest index."""
        ids, _ = assign(np.asarray(coords, dtype=np.float64).reshape(-1, 3), self.centroids)
        return ids

    def decode(self, ids: np.ndarray) -> np.ndarray:
        return self.centroids[np.asarray(ids, dtype=np.int64)]

    def rmse(self, coords: np.ndarray) -> float:
        coords = np.asarray(coords, dtype=np.float64).reshape(-1, 3)
        _, sq = assign(coords, self.centroids)
        return float(np.sqrt(sq.mean()))


def assign(points: np.ndarray, centroids: np.ndarray, chunk: int = CHUNK):
    """Nearest centroid index and squared distance per point, in fixed chunks."""
    ids = np.empty(points.shape[0], dtype=np.int64)
    sq = np.empty(points.shape[0])
    c_norm = np.sum(centroids * centroids, axis=1)
    for start in range(0, points.shape[0], chunk):
        block = points[start:start + chunk]
        d2 = np.sum(block * block, axis=1)[:, None] - 2.0 * block @ centroids.T + c_norm[None, :]
        nearest = np.argmin(d2, axis=1)
        ids[start:start + chunk] = nearest
        diff = block - centroids[nearest]
        sq[start:start + chunk] = np.sum(diff * diff, axis=1)
    return ids, sq


def kmeans_plusplus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    closest = np.sum((points - centroids[0]) ** 2, axis=1)
    for i in range(1, k):
        total = closest.sum()
        if total > 0:
            index = rng.choice(n, p=closest / total)
        else:
            index = rng.integers(n)
        centroids[i] = points[index]
        closest = np.minimum(closest, np.sum((points - centroids[i]) ** 2, axis=1))
    return centroids


def kmeans_codebook(points: np.ndarray, k: int = 4096, iters: int = 50, seed: int = 0, tol: float = 0.0) -> VoronoiCodebook:
    """k-means++ seeding followed by Lloyd iterations.

    ``history`` holds the mean squared distance after each assignment step and is
    non-increasing. Empty clusters are moved onto the points farthest from their
    current centroid.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if points.shape[0] < k:
        raise ValueError(f"need at least {k} points, got {points.shape[0]}")
    rng = np.random.default_rng(seed)
    centroids = kmeans_plusplus(points, k, rng)
    history: List[float] = []

    for _ in range(iters):
        ids, sq = assign(points, centroids)
        history.append(float(sq.mean()))
        counts = np.bincount(ids, minlength=k)
        sums = np.zeros_like(centroids)
        np.add.at(sums, ids, points)
        updated = centroids.copy()
        filled = counts > 0
        updated[filled] = sums[filled] / counts[filled, None]

        empty = np.flatnonzero(~filled)
        if empty.size:
            logger.debug(f"Re-seeding {empty.size} empty clusters")
            farthest = np.argsort(-sq, kind="stable")[:empty.size]
            updated[empty] = points[farthest]

        shift = float(np.max(np.linalg.norm(updated - centroids, axis=1)))
        centroids = updated
        if shift <= tol:
            break

    _, sq = assign(points, centroids)
    history.append(float(sq.mean()))
    return VoronoiCodebook(centroids, history)


def save_codebook(path: Union[str, Path], codebook: VoronoiCodebook) -> str:
    return write_container(path, KIND, {"centroids": codebook.centroids}, {"k": codebook.size}, dtype="<f8")


def load_codebook(path: Union[str, Path]) -> VoronoiCodebook:
    tensors, _ = read_container(path, KIND)
    return VoronoiCodebook(tensors["centroids"])
