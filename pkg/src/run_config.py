import json
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

from src.baselines.voxel import MC_SAMPLES
from src.config import Settings
from src.errors import ConfigError
from src.model.config import TokenizerConfig
from src.training.config import TrainConfig

SECTIONS = ("model", "train", "data", "baseline", "analysis")
CONFIG_FILE = "config.json"

DATA_DEFAULTS: Dict[str, Any] = {
    "manifest": None,
    "split": "test",
    "fractions": [0.8, 0.1, 0.1],
    "n": 100,
    "residues": [8, 40],
    "atoms_per_residue": [3, 6],
    "molecule_fraction": 0.0,
    "complex_fraction": 0.0,
}

BASELINE_DEFAULTS: Dict[str, Any] = {
    "kind": "voxel",
    "side": 100.0,
    "rmsd": 1.0,
    "voxel": 1.0,
    "k": 4096,
    "iters": 50,
    "n_rotations": 4,
    "n_points": 100_000,
    "samples": MC_SAMPLES,
}

ANALYSIS_DEFAULTS: Dict[str, Any] = {
    "study": None,
    "axis": "z",
    "angles": 64,
    "n_deletions": 10,
    "margin": 8,
    "n_points": 10_000,
    "dims": [4, 5, 6, 7, 8],
    "k_values": [1, 2, 4],
    "d_state_values": None,
    "seeds": [0, 1, 2],
    "depths": [2, 4, 6],
    "rungs": None,
}


@dataclass
class RunConfig:
    """Everything one command needs, resolved as defaults ← TOML file ← flags."""

    command: str
    seed: int
    output_dir: Path
    model: TokenizerConfig
    train: TrainConfig
    data: Dict[str, Any] = field(default_factory=dict)
    baseline: Dict[str, Any] = field(default_factory=dict)
    analysis: Dict[str, Any] = field(default_factory=dict)
    options: Dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "seed": self.seed,
            "output_dir": str(self.output_dir),
            "model": self.model.to_dict(),
            "train": self.train.to_dict(),
            "data": self.data,
            "baseline": self.baseline,
            "analysis": self.analysis,
            "options": {k: (str(v) if isinstance(v, Path) else v) for k, v in self.options.items()},
        }

    def echo(self) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.output_dir / CONFIG_FILE
        path.write_text(json.dumps(self.to_json(), indent=2, default=str) + "\n", encoding="utf-8")
        return path

    def require(self, section: str, key: str) -> Any:
        value = getattr(self, section).get(key)
        if value is None:
            raise ConfigError(f"{section}.{key}", "is required for this command")
        return value


def load_toml(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as e:
        raise ConfigError("config", f"{path} does not exist") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError("config", f"{path}: {e}") from e
    for key, value in data.items():
        if isinstance(value, dict) and key not in SECTIONS:
            raise ConfigError(key, f"unknown table; expected one of {list(SECTIONS)}")
    return data


def _merge(section: str, defaults: Dict[str, Any], file_values: Dict[str, Any], flags: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(defaults)
    for source in (file_values, flags):
        for key, value in source.items():
            if defaults and key not in defaults:
                raise ConfigError(f"{section}.{key}", "unknown field")
            merged[key] = value
    return merged


def _section_flags(flags: Dict[str, Any], section: str) -> Dict[str, Any]:
    prefix = f"{section}."
    return {key[len(prefix):]: value for key, value in flags.items() if key.startswith(prefix) and value is not None}


def resolve_run_config(
    command: str,
    flags: Dict[str, Any],
    settings: Settings,
    config_path: Optional[str] = None,
) -> RunConfig:
    file_data = load_toml(config_path)
    seed = flags.get("seed")
    if seed is None:
        seed = int(file_data.get("seed", 0))

    model_values = {"seed": seed, **file_data.get("model", {}), **_section_flags(flags, "model")}
    train_values = {"seed": seed, **file_data.get("train", {}), **_section_flags(flags, "train")}
    try:
        model = TokenizerConfig.from_dict(model_values)
        unknown = sorted(set(train_values) - set(TrainConfig.__dataclass_fields__))
        if unknown:
            raise ConfigError("train", f"unknown fields {unknown}")
        train = TrainConfig(**train_values)
    except TypeError as e:
        raise ConfigError("model", str(e)) from e

    output = flags.get("output") or file_data.get("output_dir")
    if not output:
        output = Path(settings.output_root) / f"{command}-{datetime.now():%Y%m%d-%H%M%S}"

    return RunConfig(
        command=command,
        seed=int(seed),
        output_dir=Path(output),
        model=model,
        train=train,
        data=_merge("data", DATA_DEFAULTS, file_data.get("data", {}), _section_flags(flags, "data")),
        baseline=_merge("baseline", BASELINE_DEFAULTS, file_data.get("baseline", {}), _section_flags(flags, "baseline")),
        analysis=_merge("analysis", ANALYSIS_DEFAULTS, file_data.get("analysis", {}), _section_flags(flags, "analysis")),
        options=_section_flags(flags, "options"),
    )
