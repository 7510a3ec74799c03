from src.training.batching import Batch, BatchLoss, batch_loss, filter_by_length, make_batch
from src.training.config import TrainConfig
from src.training.optim import AdamState, adam_step, polynomial_lr
from src.training.trainer import METRICS_FILE, Trainer, TrainState, evaluate_rmse, train

__all__ = [
    "Batch",
    "BatchLoss",
    "batch_loss",
    "filter_by_length",
    "make_batch",
    "TrainConfig",
    "AdamState",
    "adam_step",
    "polynomial_lr",
    "METRICS_FILE",
    "Trainer",
    "TrainState",
    "evaluate_rmse",
    "train",
]
