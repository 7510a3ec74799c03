import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np

from src.analysis.evaluation import domain_breakdown, evaluate
from src.analysis.mixing import fit_depth_trend, mixing_radius
from src.analysis.report import SweepReport, load_report
from src.analysis.studies import StudyData, ablation_harness, codebook_scaling_study, compression_study, run_experiment
from src.analysis.sweeps import binned_means, center_distance_profile, rotation_sweep
from src.baselines.kmeans import kmeans_codebook, save_codebook
from src.baselines.voxel import VoxelGrid, uniform_voxel_error, voxel_count, voxel_count_curve, voxel_rmsd
from src.data.manifest import build_synthetic_dataset, load_manifest, load_structure, load_structures, write_structure
from src.errors import ConfigError, SpecMismatchError
from src.geometry.pointcloud import PointCloud, center
from src.geometry.rotations import random_rotation, rotate
from src.model.checkpoint import load_checkpoint
from src.model.tokenizer import TokenizerModel
from src.quantizer.token_io import read_tokens, write_tokens
from src.run_config import RunConfig
from src.training.trainer import Trainer
from src.utils.logger import logger


@dataclass
class CommandResult:
    metrics: List[Dict[str, Any]] = field(default_factory=list)
    checkpoints: List[Tuple[int, str, str]] = field(default_factory=list)
    outputs: List[Path] = field(default_factory=list)


def _manifest(config: RunConfig):
    return load_manifest(config.require("data", "manifest"))


def _model(config: RunConfig) -> TokenizerModel:
    return load_checkpoint(config.require("options", "checkpoint")).model


def _save(report: SweepReport, config: RunConfig, result: CommandResult) -> None:
    result.outputs.extend(report.save(config.output_dir))


def cmd_train(config: RunConfig) -> CommandResult:
    manifest = _manifest(config)
    train_set = load_structures(manifest, "train")
    val_set = load_structures(manifest, "val")
    resume = config.options.get("resume")
    if resume:
        checkpoint = load_checkpoint(resume)
        trainer = Trainer.resume(checkpoint, config.train, config.output_dir)
    else:
        trainer = Trainer(TokenizerModel(config.model), config.train, config.output_dir)
    trainer.fit(train_set, val_set)
    trainer.save("final.ckpt")
    return CommandResult(metrics=trainer.history, checkpoints=list(trainer.state.checkpoints), outputs=[trainer.metrics_path])


def cmd_tokenize(config: RunConfig) -> CommandResult:
    model = _model(config)
    suffix = ".tok.txt" if config.options.get("format") == "txt" else ".tok"
    result = CommandResult()
    for name in config.require("options", "inputs"):
        pc = load_structure(name)
        tokens = model.tokenize(pc)
        path = config.output_dir / f"{Path(name).stem}{suffix}"
        path.parent.mkdir(parents=True, exist_ok=True)
        write_tokens(path, [tokens])
        logger.info(f"{name}: {pc.n_atoms} atoms → {len(tokens)} tokens")
        result.outputs.append(path)
    return result


def cmd_decode(config: RunConfig) -> CommandResult:
    model = _model(config)
    suffix = f".{config.options.get('format', 'pdb')}"
    result = CommandResult()
    for name in config.require("options", "inputs"):
        for index, tokens in enumerate(read_tokens(name)):
            if tokens.spec.levels != model.spec.levels:
                logger.error(f"Checkpoint levels {list(model.spec.levels)} vs token levels {list(tokens.spec.levels)}")
                raise SpecMismatchError(model.spec.levels, tokens.spec.levels)
            stem = Path(name).name.split(".")[0]
            pc = model.decode(tokens)
            path = config.output_dir / (f"{stem}{suffix}" if index == 0 else f"{stem}_{index}{suffix}")
            result.outputs.append(write_structure(pc, path))
    return result


def cmd_eval(config: RunConfig) -> CommandResult:
    model = _model(config)
    structures = load_structures(_manifest(config), config.data["split"])
    if not structures:
        raise ConfigError("data.split", f"split {config.data['split']!r} is empty")
    evaluation = evaluate(model, structures)
    result = CommandResult(metrics=[evaluation.aggregate])
    _save(evaluation.per_structure, config, result)
    print(json.dumps(evaluation.aggregate, indent=2))
    return result


def rotated_points(structures: Sequence[PointCloud], n_rotations: int, rng: np.random.Generator) -> np.ndarray:
    """Centered coordinates of every structure under ``n_rotations`` random orientations."""
    chunks = []
    for pc in structures:
        coords = center(pc).coords
        chunks.extend(rotate(coords, random_rotation(rng)) for _ in range(n_rotations))
    return np.vstack(chunks)


def cmd_baseline(config: RunConfig) -> CommandResult:
    params = config.baseline
    result = CommandResult()
    if params["kind"] == "voxel":
        count = voxel_count(params["side"], params["rmsd"])
        print(count)
        report = SweepReport(name="voxel", variable="side", records=voxel_count_curve(), meta={
            "side": params["side"], "rmsd": params["rmsd"], "voxel_count": count,
        })
        grid = VoxelGrid(params["side"], params["voxel"])
        error = uniform_voxel_error(grid, params["n_points"], seed=config.seed)
        expected = voxel_rmsd(params["voxel"], params["samples"])
        report.meta.update({
            "voxel": params["voxel"],
            "analytic_mean_distance": expected,
            "empirical_mean_distance": error.mean_distance,
            "empirical_rms": error.rms,
        })
        logger.info(f"Voxel {params['voxel']:g} Å: mean distance {error.mean_distance:.4f} vs analytic {expected:.4f}")
        _save(report, config, result)
        result.metrics.append(dict(report.meta))
        return result

    manifest = _manifest(config)
    rng = np.random.default_rng(config.seed)
    sample = rotated_points(load_structures(manifest, "train"), params["n_rotations"], rng)
    if sample.shape[0] > params["n_points"]:
        sample = sample[rng.choice(sample.shape[0], size=params["n_points"], replace=False)]
    codebook = kmeans_codebook(sample, params["k"], params["iters"], seed=config.seed)
    test = load_structures(manifest, "test")
    held_out = np.vstack([center(pc).coords for pc in test])
    report = SweepReport(name="kmeans", variable="iteration", meta={"k": codebook.size, "n_points": int(sample.shape[0])})
    for i, objective in enumerate(codebook.history):
        report.add(iteration=i, objective=objective)
    report.meta["test_rmse"] = codebook.rmse(held_out)
    report.meta["train_rmse"] = float(np.sqrt(codebook.history[-1]))
    if config.options.get("checkpoint"):
        model = _model(config)
        report.meta["learned_rmse"] = evaluate(model, test).aggregate["rmse"]["mean"]
    print(json.dumps(report.meta, indent=2))
    result.outputs.append(config.output_dir / "codebook.ckpt")
    config.output_dir.mkdir(parents=True, exist_ok=True)
    save_codebook(result.outputs[-1], codebook)
    _save(report, config, result)
    result.metrics.append(dict(report.meta))
    return result


def _study_data(config: RunConfig) -> StudyData:
    manifest = _manifest(config)
    return StudyData(train=load_structures(manifest, "train"), test=load_structures(manifest, "test"))


def cmd_analyze(config: RunConfig) -> CommandResult:
    study = config.require("analysis", "study")
    params = config.analysis
    result = CommandResult()
    out = config.output_dir

    if study == "rotation":
        model = _model(config)
        source = config.options.get("input")
        pc = load_structure(source) if source else load_structures(_manifest(config), "test")[0]
        reports = [rotation_sweep(model, pc, params["axis"], params["angles"])]
    elif study == "mixing":
        outcome = mixing_radius(_model(config), load_structures(_manifest(config), "test"), params["n_deletions"], params["margin"], config.seed)
        outcome.report.meta.update({"mean": outcome.mean, "std": outcome.std, "raw_mean": outcome.raw_mean})
        reports = [outcome.report]
    elif study == "depth":
        data = _study_data(config)
        depth_report = SweepReport(name="mixing_depth", variable="n_encoder_layers")
        for depth in params["depths"]:
            outcome = run_experiment(replace(config.model, n_encoder_layers=depth, compression_k=1), config.train, data, out / f"depth_{depth}")
            if outcome.model is None:
                continue
            radius = mixing_radius(outcome.model, data.test, params["n_deletions"], params["margin"], config.seed)
            depth_report.add(n_encoder_layers=depth, radius=radius.mean, std=radius.std, rmse=outcome.rmse)
        if len(depth_report) >= 2:
            trend = fit_depth_trend(depth_report.column("n_encoder_layers"), depth_report.column("radius"))
            depth_report.meta["linear"] = trend.linear._asdict()
            depth_report.meta["quadratic"] = trend.quadratic._asdict() if trend.quadratic else None
        reports = [depth_report]
    elif study == "center-distance":
        profile = center_distance_profile(_model(config), load_structures(_manifest(config), "test"), params["n_points"], config.seed)
        reports = [profile, binned_means(profile)]
    elif study == "scaling":
        report, _ = codebook_scaling_study(config.model, config.train, _study_data(config), out, params["dims"])
        reports = [report]
    elif study == "compression":
        reports = [compression_study(config.model, config.train, _study_data(config), out, params["k_values"], params["d_state_values"])]
    elif study == "ablation":
        reports = [ablation_harness(config.model, config.train, _study_data(config), out, params["seeds"], params["rungs"])]
    elif study == "domains":
        reports = [domain_breakdown(_model(config), load_structures(_manifest(config), config.data["split"]))]
    else:
        raise ConfigError("analysis.study", f"unknown study {study!r}")

    for report in reports:
        _save(report, config, result)
        result.metrics.append({"report": report.name, "records": len(report), **{
            k: v for k, v in report.meta.items() if isinstance(v, (int, float, str))
        }})
    logger.info(f"{study}: wrote {len(reports)} report(s) to {out}")
    return result


def cmd_synth(config: RunConfig) -> CommandResult:
    params = config.data
    manifest = build_synthetic_dataset(
        config.output_dir,
        params["n"],
        residues=tuple(params["residues"]),
        atoms_per_residue=tuple(params["atoms_per_residue"]),
        seed=config.seed,
        fractions=params["fractions"],
        molecule_fraction=params["molecule_fraction"],
        complex_fraction=params["complex_fraction"],
    )
    print(config.output_dir / "manifest.json")
    return CommandResult(metrics=[{"entries": len(manifest)}], outputs=[config.output_dir / "manifest.json"])


def cmd_plot_data(config: RunConfig) -> CommandResult:
    result = CommandResult()
    for name in config.require("options", "inputs"):
        report = load_report(name)
        path = Path(name).with_suffix(".tsv")
        path.write_text(report.to_tsv(), encoding="utf-8")
        print(report.to_tsv(), end="")
        result.outputs.append(path)
    return result


COMMANDS: Dict[str, Callable[[RunConfig], CommandResult]] = {
    "train": cmd_train,
    "tokenize": cmd_tokenize,
    "decode": cmd_decode,
    "eval": cmd_eval,
    "baseline": cmd_baseline,
    "analyze": cmd_analyze,
    "synth": cmd_synth,
    "plot-data": cmd_plot_data,
}
