from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.analysis.report import SweepReport
from src.errors import AnchorError
from src.geometry.alignment import kabsch_align, subset_rmse
from src.geometry.pointcloud import PointCloud, center
from src.geometry.tm_score import PROTEIN, RNA, tm_score
from src.model.tokenizer import TokenizerModel
from src.quantizer.fsq import codebook_usage
from src.utils.logger import logger

Z_95 = 1.959963984540054


@dataclass
class Summary:
    mean: float
    std: float
    ci95: float
    n: int

    def to_json(self) -> Dict[str, float]:
        return {"mean": self.mean, "std": self.std, "ci95": self.ci95, "n": self.n}


def summarize(values: Sequence[float]) -> Summary:
    """Mean ± std with a normal-approximation 95% half-width over structures."""
    values = np.asarray([v for v in values if v is not None and np.isfinite(v)], dtype=np.float64)
    if values.size == 0:
        return Summary(float("nan"), float("nan"), float("nan"), 0)
    std = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return Summary(float(values.mean()), std, Z_95 * std / np.sqrt(values.size), int(values.size))


def tm_mode(pc: PointCloud) -> Optional[str]:
    if pc.kind == "rna":
        return RNA
    if pc.atom_names and any(name == "CA" for name in pc.atom_names):
        return PROTEIN
    if pc.atom_names and any(name in ("C3'", "C3*") for name in pc.atom_names):
        return RNA
    return None


def compare_structures(target: PointCloud, prediction: PointCloud) -> Dict[str, Any]:
    """RMSE over all, backbone and side-chain atoms after one whole-structure fit, plus TM."""
    target = center(target)
    alignment = kabsch_align(target, prediction.coords)
    record = {
        "name": target.name,
        "kind": target.kind,
        "n_atoms": target.n_atoms,
        "rmse": alignment.rmse,
        "rmse_bb": subset_rmse(target, alignment.aligned, target.backbone),
        "rmse_sc": subset_rmse(target, alignment.aligned, ~target.backbone),
        "tm": None,
    }
    mode = tm_mode(target)
    try:
        if mode is None:
            raise AnchorError(f"{target.name or 'structure'} has no TM-score anchors")
        record["tm"] = tm_score(target, prediction, mode)
    except AnchorError as e:
        logger.warning(f"TM-score omitted: {e}")
    return record


@dataclass
class EvalResult:
    per_structure: SweepReport
    aggregate: Dict[str, Any] = field(default_factory=dict)


def evaluate(model: TokenizerModel, structures: Sequence[PointCloud]) -> EvalResult:
    if not structures:
        raise ValueError("nothing to evaluate")
    report = SweepReport(name="eval", variable="name", meta={"n_structures": len(structures)})
    tokens: List = []
    for pc in structures:
        sequence = model.tokenize(pc)
        tokens.append(sequence)
        record = compare_structures(pc, model.decode(sequence))
        record["n_tokens"] = len(sequence)
        report.add(**record)

    aggregate = {metric: summarize(report.column(metric)).to_json() for metric in ("rmse", "rmse_bb", "rmse_sc", "tm")}
    aggregate["codebook_usage"] = codebook_usage(tokens, model.spec.codebook_size)
    report.meta["aggregate"] = aggregate
    return EvalResult(per_structure=report, aggregate=aggregate)


def domain_breakdown(model: TokenizerModel, structures: Sequence[PointCloud]) -> SweepReport:
    """Mean RMSE per structure kind."""
    result = evaluate(model, structures)
    breakdown = SweepReport(name="domain_breakdown", variable="kind")
    kinds = result.per_structure.column("kind")
    rmse = result.per_structure.column("rmse")
    for kind in sorted(set(kinds)):
        stats = summarize([r for k, r in zip(kinds, rmse) if k == kind])
        breakdown.add(kind=kind, rmse=stats.mean, std=stats.std, ci95=stats.ci95, count=stats.n)
    return breakdown
