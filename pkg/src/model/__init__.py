from src.model.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from src.model.config import TokenizerConfig
from src.model.tokenizer import ForwardResult, TokenizerModel, decode, encode, forward_loss, tokenize

__all__ = [
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "TokenizerConfig",
    "ForwardResult",
    "TokenizerModel",
    "decode",
    "encode",
    "forward_loss",
    "tokenize",
]
