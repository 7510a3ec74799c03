"""How far the effect of one atom spreads through the encoder.

Delete atom i, re-tokenize, and compare with the original tokens after skipping
position i. The changed positions span a window; its half-width is the radius.
Structures are centred once up front, so the deletion does not also translate
every other atom.
"""

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from src.analysis.report import SweepReport
from src.errors import ConfigError
from src.geometry.pointcloud import PointCloud, center
from src.model.tokenizer import TokenizerModel


class DeletionEffect(NamedTuple):
    changed: int
    half_width: float
    raw_changed: int


def deletion_effect(original: np.ndarray, deleted: np.ndarray, index: int) -> DeletionEffect:
    original = np.asarray(original)
    deleted = np.asarray(deleted)
    if deleted.size != original.size - 1:
        raise ValueError("deleted sequence must be one token shorter")
    aligned = np.delete(original, index)
    positions = np.flatnonzero(aligned != deleted)
    # back to original numbering so the window straddles the deleted atom
    positions = np.where(positions >= index, positions + 1, positions)
    half_width = 0.0
    if positions.size:
        half_width = (positions.max() - positions.min() + 1) / 2.0
    raw = int(np.count_nonzero(original[:-1] != deleted)) + 1
    return DeletionEffect(int(positions.size), half_width, raw)


@dataclass
class MixingResult:
    mean: float
    std: float
    raw_mean: float
    report: SweepReport


def mixing_radius(
    model: TokenizerModel,
    structures: Sequence[PointCloud],
    n_deletions: int = 10,
    margin: int = 8,
    seed: int = 0,
) -> MixingResult:
    if model.config.compression_k != 1:
        raise ConfigError("model.compression_k", "mixing radius is defined for per-atom tokens (k = 1)")
    rng = np.random.default_rng(seed)
    report = SweepReport(name="mixing_radius", variable="index", meta={
        "n_encoder_layers": model.config.n_encoder_layers, "seed": seed,
    })
    for s, pc in enumerate(structures):
        if pc.n_atoms < 3:
            raise ValueError(f"structure {pc.name or s} has fewer than 3 atoms")
        centered = center(pc)
        original = model.tokenize(centered, center_input=False).ids
        edge = min(margin, (pc.n_atoms - 1) // 2)
        candidates = np.arange(edge, pc.n_atoms - edge)
        picks = rng.choice(candidates, size=min(n_deletions, candidates.size), replace=False)
        for index in sorted(int(i) for i in picks):
            deleted = model.tokenize(centered.delete(index), center_input=False).ids
            effect = deletion_effect(original, deleted, index)
            report.add(
                structure=pc.name or str(s),
                index=index,
                changed=effect.changed,
                half_width=effect.half_width,
                raw_changed=effect.raw_changed,
            )
    widths = np.asarray(report.column("half_width"), dtype=np.float64)
    raw = np.asarray(report.column("raw_changed"), dtype=np.float64)
    return MixingResult(
        mean=float(widths.mean()) if widths.size else 0.0,
        std=float(widths.std()) if widths.size else 0.0,
        raw_mean=float(raw.mean()) if raw.size else 0.0,
        report=report,
    )


class PolyFit(NamedTuple):
    coefficients: List[float]
    r2: float


@dataclass
class DepthTrend:
    linear: PolyFit
    quadratic: Optional[PolyFit]


def r_squared(y: np.ndarray, fitted: np.ndarray) -> float:
    residual = float(np.sum((y - fitted) ** 2))
    total = float(np.sum((y - y.mean()) ** 2))
    if total == 0.0:
        return 1.0 if residual == 0.0 else 0.0
    return 1.0 - residual / total


def polyfit(x: Sequence[float], y: Sequence[float], degree: int) -> PolyFit:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    coefficients = np.polyfit(x, y, degree)
    return PolyFit([float(c) for c in coefficients], r_squared(y, np.polyval(coefficients, x)))


def fit_depth_trend(depths: Sequence[int], radii: Sequence[float]) -> DepthTrend:
    """Linear and (given three or more depths) quadratic fits of radius against depth."""
    if len(depths) != len(radii) or len(depths) < 2:
        raise ValueError("need at least two (depth, radius) pairs")
    quadratic = polyfit(depths, radii, 2) if len(set(depths)) >= 3 else None
    return DepthTrend(linear=polyfit(depths, radii, 1), quadratic=quadratic)
