"""Train-and-measure studies: codebook size, compression factor and the ablation ladder.

Each run trains a fresh model under its own sub-directory and is scored by the mean
aligned RMSE on the test structures. Runs that abort or end non-finite are left out
of the fits and listed in the report metadata.
"""

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from src.analysis.mixing import r_squared
from src.analysis.report import SweepReport
from src.errors import ShapeError, TrainingAborted
from src.geometry.losses import LossConfig
from src.geometry.pointcloud import PointCloud
from src.model.config import TokenizerConfig
from src.model.tokenizer import TokenizerModel
from src.quantizer.fsq import FsqSpec
from src.training.config import TrainConfig
from src.training.trainer import Trainer, evaluate_rmse
from src.utils.logger import logger


@dataclass(frozen=True)
class StudyData:
    train: Sequence[PointCloud]
    test: Sequence[PointCloud]


class RunOutcome(NamedTuple):
    model: Optional[TokenizerModel]
    rmse: Optional[float]


def run_experiment(
    model_config: TokenizerConfig,
    train_config: TrainConfig,
    data: StudyData,
    output_dir: Path,
    loss_config: LossConfig = LossConfig(),
) -> RunOutcome:
    model = TokenizerModel(model_config)
    try:
        Trainer(model, train_config, output_dir, loss_config).fit(data.train)
    except TrainingAborted as e:
        logger.warning(f"Excluding run in {output_dir}: {e}")
        return RunOutcome(None, None)
    rmse = evaluate_rmse(model, data.test)
    if not math.isfinite(rmse):
        logger.warning(f"Excluding run in {output_dir}: non-finite test RMSE")
        return RunOutcome(None, None)
    return RunOutcome(model, rmse)


class PowerLaw(NamedTuple):
    alpha: float
    beta: float
    r2: float


def fit_power_law(sizes: Sequence[float], rmse: Sequence[float]) -> PowerLaw:
    """Least squares fit of log(rmse) = α·log(size) + β."""
    if len(sizes) != len(rmse) or len(sizes) < 2:
        raise ValueError("need at least two (size, rmse) pairs")
    x = np.log(np.asarray(sizes, dtype=np.float64))
    y = np.log(np.asarray(rmse, dtype=np.float64))
    alpha, beta = np.polyfit(x, y, 1)
    return PowerLaw(float(alpha), float(beta), r_squared(y, alpha * x + beta))


def codebook_scaling_study(
    base: TokenizerConfig,
    train_config: TrainConfig,
    data: StudyData,
    output_dir: Path,
    dims: Sequence[int] = (4, 5, 6, 7, 8),
    levels: int = 4,
) -> Tuple[SweepReport, Optional[PowerLaw]]:
    report = SweepReport(name="codebook_scaling", variable="codebook_size", meta={"levels": levels, "excluded": []})
    for d in dims:
        spec = FsqSpec.uniform(levels, d)
        outcome = run_experiment(replace(base, fsq=spec), train_config, data, Path(output_dir) / f"dims_{d}")
        if outcome.rmse is None:
            report.meta["excluded"].append(d)
            continue
        report.add(codebook_size=spec.codebook_size, dims=d, rmse=outcome.rmse)
    fit = None
    if len(report) >= 2:
        fit = fit_power_law(report.column("codebook_size"), report.column("rmse"))
        report.meta.update({"alpha": fit.alpha, "beta": fit.beta, "r2": fit.r2})
    return report, fit


def compression_study(
    base: TokenizerConfig,
    train_config: TrainConfig,
    data: StudyData,
    output_dir: Path,
    k_values: Sequence[int] = (1, 2, 4),
    d_state_values: Optional[Sequence[int]] = None,
) -> SweepReport:
    """RMSE per compression factor, relative to k = 1 at the same hidden state size."""
    report = SweepReport(name="compression", variable="k", meta={"excluded": []})
    baseline: Dict[int, float] = {}
    for d_state in d_state_values or (base.d_state,):
        for k in k_values:
            config = replace(base, compression_k=k, d_state=d_state)
            outcome = run_experiment(config, train_config, data, Path(output_dir) / f"k{k}_n{d_state}")
            if outcome.rmse is None:
                report.meta["excluded"].append({"k": k, "d_state": d_state})
                continue
            for pc in data.test:
                n_tokens = len(outcome.model.tokenize(pc))
                if n_tokens != -(-pc.n_atoms // k):
                    raise ShapeError("compression_study", (n_tokens,), (-(-pc.n_atoms // k),), detail=f"k={k}")
            if k == 1:
                baseline[d_state] = outcome.rmse
            ratio = outcome.rmse / baseline[d_state] if d_state in baseline else None
            report.add(k=k, d_state=d_state, rmse=outcome.rmse, ratio=ratio)
    return report


ABLATION_LADDER: List[Tuple[str, Dict, Dict, Dict]] = [
    ("small", {"n_encoder_layers": 2, "n_decoder_layers": 4, "bidirectional": False}, {"augment_rotations": False}, {"use_interatomic": False}),
    ("+rotation", {"n_encoder_layers": 2, "n_decoder_layers": 4, "bidirectional": False}, {"augment_rotations": True}, {"use_interatomic": False}),
    ("+bidirectional", {"n_encoder_layers": 2, "n_decoder_layers": 4, "bidirectional": True}, {"augment_rotations": True}, {"use_interatomic": False}),
    ("+deeper", {"n_encoder_layers": 4, "n_decoder_layers": 6, "bidirectional": True}, {"augment_rotations": True}, {"use_interatomic": False}),
    ("+interatomic", {"n_encoder_layers": 4, "n_decoder_layers": 6, "bidirectional": True}, {"augment_rotations": True}, {"use_interatomic": True}),
]


def ablation_harness(
    base: TokenizerConfig,
    train_config: TrainConfig,
    data: StudyData,
    output_dir: Path,
    seeds: Sequence[int] = (0, 1, 2),
    rungs: Optional[Sequence[str]] = None,
) -> SweepReport:
    """Mean RMSE over seeds for each cumulative rung of the ladder."""
    report = SweepReport(name="ablation", variable="rung", meta={"seeds": list(seeds), "excluded": []})
    for name, model_changes, train_changes, loss_changes in ABLATION_LADDER:
        if rungs is not None and name not in rungs:
            continue
        scores = []
        for seed in seeds:
            outcome = run_experiment(
                replace(base, seed=seed, **model_changes),
                replace(train_config, seed=seed, **train_changes),
                data,
                Path(output_dir) / name.lstrip("+") / f"seed_{seed}",
                LossConfig(**loss_changes),
            )
            if outcome.rmse is None:
                report.meta["excluded"].append({"rung": name, "seed": seed})
            else:
                scores.append(outcome.rmse)
        if scores:
            report.add(rung=name, rmse=float(np.mean(scores)), std=float(np.std(scores)), runs=len(scores))
    return report
