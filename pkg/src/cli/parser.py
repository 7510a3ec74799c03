"""Argument parser.

Flags that override run configuration use ``dest="<section>.<field>"`` and default to
None, so only flags given on the command line take part in resolution.
"""

import argparse

STUDIES = ("mixing", "depth", "rotation", "center-distance", "scaling", "compression", "ablation", "domains")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help="output directory (default: $ATOMTOK_OUTPUT_ROOT/<command>-<time>)")


def _model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--enc-layers", type=int, dest="model.n_encoder_layers")
    g.add_argument("--dec-layers", type=int, dest="model.n_decoder_layers")
    g.add_argument("--d-model", type=int, dest="model.d_model")
    g.add_argument("--d-state", type=int, dest="model.d_state")
    g.add_argument("--levels", type=int, nargs="+", dest="model.fsq", help="FSQ levels per latent dimension")
    g.add_argument("--k", type=int, dest="model.compression_k", choices=(1, 2, 4))
    g.add_argument("--unidirectional", action="store_const", const=False, dest="model.bidirectional")
    g.add_argument("--scan-mode", dest="model.scan_mode", choices=("parallel", "sequential"))


def _train_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("training")
    g.add_argument("--steps", type=int, dest="train.total_steps")
    g.add_argument("--batch-size", type=int, dest="train.batch_size")
    g.add_argument("--effective-batch", type=int, dest="train.effective_batch")
    g.add_argument("--lr", type=float, dest="train.lr_start")
    g.add_argument("--max-seq-len", type=int, dest="train.max_seq_len")
    g.add_argument("--no-augment", action="store_const", const=False, dest="train.augment_rotations")
    g.add_argument("--checkpoint-every", type=int, dest="train.checkpoint_every")
    g.add_argument("--validate-every", type=int, dest="train.validate_every")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atomtokens", description="Tokenize all-atom point clouds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a tokenizer")
    _common(p)
    _model_flags(p)
    _train_flags(p)
    p.add_argument("--manifest", dest="data.manifest")
    p.add_argument("--resume", dest="options.resume", help="checkpoint to continue from")

    p = sub.add_parser("tokenize", help="structure files to token files")
    _common(p)
    p.add_argument("--checkpoint", required=True, dest="options.checkpoint")
    p.add_argument("--format", choices=("bin", "txt"), default="bin", dest="options.format")
    p.add_argument("inputs", nargs="+")

    p = sub.add_parser("decode", help="token files to structure files")
    _common(p)
    p.add_argument("--checkpoint", required=True, dest="options.checkpoint")
    p.add_argument("--format", choices=("pdb", "xyz"), default="pdb", dest="options.format")
    p.add_argument("inputs", nargs="+")

    p = sub.add_parser("eval", help="reconstruction metrics on a manifest split")
    _common(p)
    p.add_argument("--checkpoint", required=True, dest="options.checkpoint")
    p.add_argument("--manifest", dest="data.manifest")
    p.add_argument("--split", dest="data.split", choices=("train", "val", "test"))

    p = sub.add_parser("baseline", help="voxel and k-means codecs")
    _common(p)
    p.add_argument("kind", choices=("voxel", "kmeans"))
    p.add_argument("--A", type=float, dest="baseline.side", help="cube side in Å")
    p.add_argument("--rmsd", type=float, dest="baseline.rmsd")
    p.add_argument("--voxel", type=float, dest="baseline.voxel", help="voxel side in Å")
    p.add_argument("--samples", type=int, dest="baseline.samples")
    p.add_argument("--K", type=int, dest="baseline.k")
    p.add_argument("--iters", type=int, dest="baseline.iters")
    p.add_argument("--rotations", type=int, dest="baseline.n_rotations")
    p.add_argument("--points", type=int, dest="baseline.n_points")
    p.add_argument("--manifest", dest="data.manifest")
    p.add_argument("--checkpoint", dest="options.checkpoint", help="learned model to compare against")

    p = sub.add_parser("analyze", help="diagnostic studies")
    _common(p)
    _model_flags(p)
    _train_flags(p)
    p.add_argument("study", choices=STUDIES)
    p.add_argument("--checkpoint", dest="options.checkpoint")
    p.add_argument("--manifest", dest="data.manifest")
    p.add_argument("--input", dest="options.input", help="structure file for the rotation sweep")
    p.add_argument("--axis", choices=("x", "y", "z"), dest="analysis.axis")
    p.add_argument("--angles", type=int, dest="analysis.angles")
    p.add_argument("--deletions", type=int, dest="analysis.n_deletions")
    p.add_argument("--points", type=int, dest="analysis.n_points")
    p.add_argument("--dims", type=int, nargs="+", dest="analysis.dims")
    p.add_argument("--k-values", type=int, nargs="+", dest="analysis.k_values")
    p.add_argument("--d-states", type=int, nargs="+", dest="analysis.d_state_values")
    p.add_argument("--seeds", type=int, nargs="+", dest="analysis.seeds")
    p.add_argument("--depths", type=int, nargs="+", dest="analysis.depths")

    p = sub.add_parser("synth", help="write a synthetic dataset and manifest")
    _common(p)
    p.add_argument("--n", type=int, dest="data.n")
    p.add_argument("--residues", type=int, nargs=2, dest="data.residues", metavar=("MIN", "MAX"))
    p.add_argument("--atoms-per-residue", type=int, nargs=2, dest="data.atoms_per_residue", metavar=("MIN", "MAX"))
    p.add_argument("--fractions", type=float, nargs=3, dest="data.fractions", metavar=("TRAIN", "VAL", "TEST"))
    p.add_argument("--molecules", type=float, dest="data.molecule_fraction")
    p.add_argument("--complexes", type=float, dest="data.complex_fraction")

    p = sub.add_parser("plot-data", help="report JSON to tab-separated columns")
    _common(p)
    p.add_argument("inputs", nargs="+")

    return parser


def split_flags(args: argparse.Namespace) -> dict:
    """Namespace to the flat flag mapping consumed by run-config resolution."""
    values = vars(args)
    flags = {key: value for key, value in values.items() if "." in key}
    flags["seed"] = values.get("seed")
    flags["output"] = values.get("output")
    if "inputs" in values:
        flags["options.inputs"] = values["inputs"]
    if "study" in values:
        flags["analysis.study"] = values["study"]
    if "kind" in values and values.get("command") == "baseline":
        flags["baseline.kind"] = values["kind"]
    return flags
