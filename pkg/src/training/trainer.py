import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import TrainingAborted
from src.geometry.alignment import aligned_rmsd
from src.geometry.losses import LossConfig
from src.geometry.pointcloud import PointCloud, center
from src.geometry.rotations import random_rotation, rotate
from src.model.checkpoint import Checkpoint, save_checkpoint
from src.model.tokenizer import TokenizerModel
from src.quantizer.fsq import codebook_usage
from src.training.batching import batch_loss, filter_by_length, make_batch
from src.training.config import TrainConfig
from src.training.optim import AdamState, adam_step, polynomial_lr
from src.utils.logger import logger

METRICS_FILE = "metrics.jsonl"


@dataclass
class TrainState:
    step: int = 0
    adam: AdamState = field(default_factory=AdamState)
    rng: np.random.Generator = field(default_factory=np.random.default_rng)
    best_val: float = math.inf
    consecutive_skips: int = 0
    checkpoints: List[Tuple[int, str, str]] = field(default_factory=list)

    def to_meta(self) -> Dict[str, Any]:
        return {
            "step": self.step,
            "adam_t": self.adam.t,
            "rng_state": self.rng.bit_generator.state,
            "best_val": None if math.isinf(self.best_val) else self.best_val,
            "consecutive_skips": self.consecutive_skips,
        }

    @classmethod
    def from_checkpoint(cls, checkpoint: Checkpoint) -> "TrainState":
        meta = checkpoint.state
        rng = np.random.default_rng()
        rng.bit_generator.state = meta["rng_state"]
        best_val = meta.get("best_val")
        return cls(
            step=int(meta["step"]),
            adam=AdamState.from_tensors(checkpoint.extra_tensors, t=int(meta["adam_t"])),
            rng=rng,
            best_val=math.inf if best_val is None else float(best_val),
            consecutive_skips=int(meta.get("consecutive_skips", 0)),
        )


def evaluate_rmse(model: TokenizerModel, structures: Sequence[PointCloud]) -> float:
    """Mean Kabsch-aligned RMSE of decode(tokenize(x)) against the centered input."""
    scores = [aligned_rmsd(center(pc), model.reconstruct(pc)) for pc in structures]
    return float(np.mean(scores))


class Trainer:
    logger = logger

    def __init__(
        self,
        model: TokenizerModel,
        config: TrainConfig,
        output_dir: Path,
        loss_config: LossConfig = LossConfig(),
        state: Optional[TrainState] = None,
    ) -> None:
        self.model = model
        self.config = config
        self.output_dir = Path(output_dir)
        self.loss_config = loss_config
        self.state = state or TrainState(rng=np.random.default_rng(config.seed))
        self.history: List[Dict[str, Any]] = []

    @classmethod
    def resume(
        cls,
        checkpoint: Checkpoint,
        config: TrainConfig,
        output_dir: Path,
        loss_config: LossConfig = LossConfig(),
    ) -> "Trainer":
        trainer = cls(checkpoint.model, config, output_dir, loss_config, TrainState.from_checkpoint(checkpoint))
        trainer.logger.info(f"Resuming from step {trainer.state.step}")
        return trainer

    @property
    def metrics_path(self) -> Path:
        return self.output_dir / METRICS_FILE

    def _prepare(self, pc: PointCloud) -> PointCloud:
        pc = center(pc)
        if self.config.augment_rotations:
            pc = pc.with_coords(rotate(pc.coords, random_rotation(self.state.rng)))
        return pc

    def _sample(self, pool: Sequence[PointCloud]) -> List[PointCloud]:
        size = min(self.config.batch_size, len(pool))
        picks = self.state.rng.choice(len(pool), size=size, replace=False)
        return [self._prepare(pool[int(i)]) for i in picks]

    def train_step(self, pool: Sequence[PointCloud]) -> Dict[str, Any]:
        state, config = self.state, self.config
        lr = polynomial_lr(state.step, config)
        self.model.zero_grad()

        micro_batches = [self._sample(pool) for _ in range(config.accumulation_steps)]
        n_structures = sum(len(b) for b in micro_batches)
        loss_value = rmse = interatomic = 0.0
        tokens = []
        finite = True
        for structures in micro_batches:
            batch = make_batch(structures, config.max_seq_len, config.batch_size)
            result = batch_loss(self.model, batch, self.loss_config, scale=1.0 / n_structures)
            value = result.total.item()
            if not math.isfinite(value):
                finite = False
                break
            result.total.backward()
            loss_value += value
            rmse += result.rmse / n_structures
            interatomic += result.interatomic / n_structures
            tokens.extend(result.tokens)

        if finite:
            applied = adam_step(self.model.named_parameters(), state.adam, lr)
        else:
            self.logger.warning(f"Non-finite loss at step {state.step + 1}; skipping")
            applied = False
        self.model.zero_grad()
        state.step += 1

        if applied:
            state.consecutive_skips = 0
        else:
            state.consecutive_skips += 1
            if state.consecutive_skips >= config.max_consecutive_skips:
                raise TrainingAborted(state.step)

        record = {"step": state.step, "lr": lr, "skipped": not applied}
        if finite:
            record.update({
                "train_loss": loss_value,
                "rmse_term": rmse,
                "interatomic_term": interatomic,
                "codebook_usage": codebook_usage(tokens, self.model.spec.codebook_size),
            })
        return record

    def save(self, name: str) -> Path:
        path = self.output_dir / "checkpoints" / name
        checksum = save_checkpoint(path, self.model, self.state.adam.to_tensors(), self.state.to_meta())
        self.state.checkpoints.append((self.state.step, str(path), checksum))
        return path

    def validate(self, val_set: Sequence[PointCloud]) -> float:
        val_rmse = evaluate_rmse(self.model, val_set)
        self.logger.info(f"Step {self.state.step}: validation RMSE {val_rmse:.4f} Å")
        if val_rmse < self.state.best_val:
            self.state.best_val = val_rmse
            self.save("best.ckpt")
        return val_rmse

    def _truncate_metrics(self) -> None:
        """Keep only the log records up to the resumed step."""
        kept = []
        for line in self.metrics_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                self.logger.warning(f"Dropping unreadable line in {self.metrics_path}")
                continue
            if int(record.get("step", 0)) <= self.state.step:
                kept.append(line)
        self.metrics_path.write_text("".join(f"{line}\n" for line in kept), encoding="utf-8")

    def fit(self, train_set: Sequence[PointCloud], val_set: Sequence[PointCloud] = ()) -> TrainState:
        pool, excluded = filter_by_length(train_set, self.config.max_seq_len)
        if excluded:
            self.logger.info(f"Excluded {excluded} structures longer than {self.config.max_seq_len} atoms from training")
        if not pool:
            raise ValueError("training set is empty after the length filter")

        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.logger.info(f"Training from step {self.state.step} to {self.config.total_steps} on {len(pool)} structures")
        mode = "w"
        if self.state.step > 0 and self.metrics_path.exists():
            self._truncate_metrics()
            mode = "a"
        with open(self.metrics_path, mode, encoding="utf-8") as log:
            while self.state.step < self.config.total_steps:
                record = self.train_step(pool)
                step = self.state.step
                if val_set and step % self.config.validate_every == 0:
                    record["val_rmse"] = self.validate(val_set)
                if step % self.config.checkpoint_every == 0 or step == self.config.total_steps:
                    self.save(f"step_{step:06d}.ckpt")
                log.write(json.dumps(record) + "\n")
                log.flush()
                self.history.append(record)
                if step % 10 == 0:
                    self.logger.debug(f"step {step} loss {record.get('train_loss', float('nan')):.4f}")
        return self.state


def train(
    model: TokenizerModel,
    train_set: Sequence[PointCloud],
    config: TrainConfig,
    output_dir: Path,
    val_set: Sequence[PointCloud] = (),
    loss_config: LossConfig = LossConfig(),
) -> TrainState:
    return Trainer(model, config, output_dir, loss_config).fit(train_set, val_set)
