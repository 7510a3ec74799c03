from dataclasses import asdict, dataclass, field
from typing import Any, Dict

from src.errors import ConfigError
from src.quantizer.fsq import FsqSpec
from src.ssm.block import SsmConfig
from src.ssm.scan import KERNELS, PARALLEL

COMPRESSION_FACTORS = (1, 2, 4)


@dataclass(frozen=True)
class TokenizerConfig:
    n_encoder_layers: int = 4
    n_decoder_layers: int = 6
    d_model: int = 128
    fsq: FsqSpec = field(default_factory=FsqSpec)
    compression_k: int = 1
    d_state: int = 16
    conv_width: int = 4
    expand: int = 2
    bidirectional: bool = True
    scan_mode: str = PARALLEL
    chunk_size: int = 2048
    seed: int = 0

    def __post_init__(self) -> None:
        if self.compression_k not in COMPRESSION_FACTORS:
            raise ConfigError("model.compression_k", f"must be one of {COMPRESSION_FACTORS}, got {self.compression_k}")
        for name in ("n_encoder_layers", "n_decoder_layers"):
            if getattr(self, name) < 0:
                raise ConfigError(f"model.{name}", "must be non-negative")
        for name in ("d_model", "d_state", "conv_width", "expand", "chunk_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"model.{name}", "must be at least 1")
        if self.scan_mode not in KERNELS:
            raise ConfigError("model.scan_mode", f"must be one of {sorted(KERNELS)}")

    @property
    def ssm(self) -> SsmConfig:
        return SsmConfig(
            d_model=self.d_model,
            d_state=self.d_state,
            conv_width=self.conv_width,
            expand=self.expand,
            scan_mode=self.scan_mode,
            chunk_size=self.chunk_size,
        )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["fsq"] = list(self.fsq.levels)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TokenizerConfig":
        data = dict(data)
        if "fsq" in data:
            data["fsq"] = FsqSpec(tuple(data["fsq"]))
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError("model", f"unknown fields {unknown}")
        return cls(**data)
