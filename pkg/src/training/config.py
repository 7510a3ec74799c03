from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

from src.errors import ConfigError


@dataclass(frozen=True)
class TrainConfig:
    lr_start: float = 3e-4
    end_lr: float = 0.0
    power: float = 1.0
    total_steps: int = 1000
    batch_size: int = 4
    effective_batch: Optional[int] = None
    max_seq_len: int = 4096
    augment_rotations: bool = True
    seed: int = 0
    checkpoint_every: int = 100
    validate_every: int = 100
    max_consecutive_skips: int = 3

    def __post_init__(self) -> None:
        if self.lr_start <= 0 or self.end_lr < 0 or self.end_lr > self.lr_start:
            raise ConfigError("train.lr_start", "need lr_start > 0 and 0 <= end_lr <= lr_start")
        if self.power <= 0:
            raise ConfigError("train.power", "must be positive")
        for name in ("total_steps", "batch_size", "max_seq_len", "checkpoint_every", "validate_every"):
            if getattr(self, name) < 1:
                raise ConfigError(f"train.{name}", "must be at least 1")
        if self.effective_batch is not None and (
            self.effective_batch < self.batch_size or self.effective_batch % self.batch_size
        ):
            raise ConfigError("train.effective_batch", "must be a multiple of batch_size")

    @property
    def accumulation_steps(self) -> int:
        if self.effective_batch is None:
            return 1
        return self.effective_batch // self.batch_size

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
