from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from src.model.config import TokenizerConfig
from src.model.tokenizer import TokenizerModel
from src.tensor.core import precision
from src.utils.container import read_container, write_container
from src.utils.logger import logger

KIND = "checkpoint"
PARAM_PREFIX = "param."


@dataclass
class Checkpoint:
    model: TokenizerModel
    extra_tensors: Dict[str, np.ndarray] = field(default_factory=dict)
    state: Dict[str, Any] = field(default_factory=dict)
    checksum: str = ""


def save_checkpoint(
    path: Union[str, Path],
    model: TokenizerModel,
    extra_tensors: Optional[Dict[str, np.ndarray]] = None,
    state: Optional[Dict[str, Any]] = None,
) -> str:
    """Write config, parameters and optional optimizer tensors; returns the checksum."""
    tensors = {f"{PARAM_PREFIX}{name}": value for name, value in model.state_dict().items()}
    tensors.update(extra_tensors or {})
    meta = {"config": model.config.to_dict(), "state": state or {}}
    wide = any(p.data.dtype == np.float64 for p in model.parameters())
    checksum = write_container(path, KIND, tensors, meta, dtype="<f8" if wide else "<f4")
    logger.info(f"Checkpoint written to {path} ({checksum[:12]})")
    return checksum


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """Rebuild the model at the width the parameters were stored in."""
    tensors, meta = read_container(path, KIND)
    params = {name[len(PARAM_PREFIX):]: value for name, value in tensors.items() if name.startswith(PARAM_PREFIX)}
    wide = any(value.dtype == np.float64 for value in params.values())
    with precision(np.float64 if wide else np.float32):
        model = TokenizerModel(TokenizerConfig.from_dict(meta["config"]))
    model.load_state_dict(params)
    extra = {name: value for name, value in tensors.items() if not name.startswith(PARAM_PREFIX)}
    return Checkpoint(model=model, extra_tensors=extra, state=meta.get("state", {}), checksum=meta["checksum"])
