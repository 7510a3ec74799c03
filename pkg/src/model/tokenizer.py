"""Encoder → (pool) → FSQ → (unpool) → decoder over per-atom coordinate sequences.

Input features are raw centered coordinates in Å; atom order is file order and is
part of the token contract, since token i describes atom i (or pool window i).
"""

from typing import List, NamedTuple, Optional

import numpy as np

from src.errors import CodebookError, ShapeError
from src.geometry.losses import LossConfig, LossTerms, total_loss
from src.geometry.pointcloud import PointCloud, ResidueGroups, center
from src.model.config import TokenizerConfig
from src.quantizer.fsq import TokenSequence, bound, codes_to_latent, quantize, tokens_to_latent
from src.ssm.block import SsmParams, bidirectional_block, mamba_block
from src.tensor import ops
from src.tensor.core import Tensor, no_grad
from src.tensor.module import LayerNorm, Linear, Module, parameter
from src.utils.logger import logger


def causal_taps(kernel: Tensor, seq: int) -> Tensor:
    """Last ``seq`` taps of a causal kernel; the earlier ones only see padding."""
    width = kernel.shape[0]
    if seq >= width:
        return kernel
    return ops.slice_rows(kernel, width - seq, width)


class ResidualBlock(Module):
    """Pre-norm residual around one (bidirectional) SSM block."""

    def __init__(self, config: TokenizerConfig, rng: np.random.Generator) -> None:
        self.norm = LayerNorm(config.d_model)
        self.mixer = SsmParams(config.ssm, rng)
        self.bidirectional = config.bidirectional

    def __call__(self, x: Tensor) -> Tensor:
        block = bidirectional_block if self.bidirectional else mamba_block
        return ops.add(x, block(self.norm(x), self.mixer))


class ForwardResult(NamedTuple):
    terms: LossTerms
    tokens: TokenSequence
    reconstruction: Tensor


class TokenizerModel(Module):
    logger = logger

    def __init__(self, config: TokenizerConfig = TokenizerConfig()) -> None:
        self.config = config
        rng = np.random.default_rng(config.seed)
        d_model, k = config.d_model, config.compression_k

        self.input_proj = Linear(rng, 3, d_model)
        self.encoder = [ResidualBlock(config, rng) for _ in range(config.n_encoder_layers)]
        self.encoder_norm = LayerNorm(d_model)
        self.pool_kernel = parameter(np.full((k, d_model), 1.0 / k)) if k > 1 else None
        self.pool_bias = parameter(np.zeros(d_model)) if k > 1 else None
        self.quant_head = Linear(rng, d_model, config.fsq.dims)
        self.dequant_head = Linear(rng, config.fsq.dims, d_model)
        self.unpool_kernel = parameter(np.vstack([np.zeros((k - 1, d_model)), np.ones((1, d_model))])) if k > 1 else None
        self.unpool_bias = parameter(np.zeros(d_model)) if k > 1 else None
        self.decoder = [ResidualBlock(config, rng) for _ in range(config.n_decoder_layers)]
        self.decoder_norm = LayerNorm(d_model)
        self.output_proj = Linear(rng, d_model, 3)

        self.logger.info(f"Tokenizer has {self.parameter_count():,} parameters")

    @property
    def spec(self):
        return self.config.fsq

    def token_length(self, n_atoms: int) -> int:
        return -(-n_atoms // self.config.compression_k)

    def zero_mixers(self) -> None:
        for block in self.encoder + self.decoder:
            block.mixer.zero_()

    def _coords(self, pc: PointCloud, center_input: bool) -> Tensor:
        if pc.n_atoms < 1:
            raise ShapeError("encode", pc.coords.shape, detail="empty point cloud")
        coords = center(pc).coords if center_input else pc.coords
        return Tensor(coords.astype(self.input_proj.weight.data.dtype))

    def encoder_latent(self, x: Tensor) -> Tensor:
        """Unbounded per-position latents [n×D] from coordinates [N×3]."""
        h = self.input_proj(x)
        for block in self.encoder:
            h = block(h)
        h = self.encoder_norm(h)
        if self.pool_kernel is not None:
            h = ops.add_bias(ops.strided_pool(h, self.pool_kernel, self.config.compression_k), self.pool_bias)
        return self.quant_head(h)

    def decode_latent(self, latent: Tensor, n_atoms: int) -> Tensor:
        """Coordinates [N×3] from lattice-normalized latents [n×D]."""
        if latent.shape[0] != self.token_length(n_atoms):
            raise ShapeError("decode", latent.shape, (self.token_length(n_atoms), self.spec.dims))
        h = self.dequant_head(latent)
        if self.unpool_kernel is not None:
            h = ops.repeat_rows(h, self.config.compression_k, n_atoms)
            h = ops.conv1d_depthwise(h, causal_taps(self.unpool_kernel, n_atoms), padding="causal")
            h = ops.add_bias(h, self.unpool_bias)
        for block in self.decoder:
            h = block(h)
        return self.output_proj(self.decoder_norm(h))

    def encode(self, pc: PointCloud, center_input: bool = True) -> Tensor:
        return bound(self.encoder_latent(self._coords(pc, center_input)), self.spec)

    def tokenize(self, pc: PointCloud, center_input: bool = True) -> TokenSequence:
        with no_grad():
            _, tokens = quantize(self.encode(pc, center_input), self.spec)
        tokens.n_atoms = pc.n_atoms
        tokens.compression = self.config.compression_k
        return tokens

    def decode(self, tokens: TokenSequence) -> PointCloud:
        if len(tokens) != self.token_length(tokens.n_atoms):
            raise CodebookError(
                f"{len(tokens)} tokens cannot describe {tokens.n_atoms} atoms at compression {self.config.compression_k}"
            )
        with no_grad():
            coords = self.decode_latent(tokens_to_latent(tokens, self.spec), tokens.n_atoms)
        return PointCloud(coords.data.astype(np.float64))

    def reconstruct(self, pc: PointCloud) -> PointCloud:
        """decode(tokenize(pc)) carrying over the input annotations."""
        decoded = self.decode(self.tokenize(pc))
        return center(pc).with_coords(decoded.coords)

    def forward_loss(
        self,
        pc: PointCloud,
        loss_config: LossConfig = LossConfig(),
        groups: Optional[ResidueGroups] = None,
        surrogate: bool = False,
    ) -> ForwardResult:
        """Reconstruction loss with straight-through gradients across the quantizer.

        ``surrogate=True`` feeds the unrounded latents to the decoder, i.e. evaluates the
        function whose gradient the straight-through rule reports.
        """
        centered = center(pc)
        z_bounded = self.encode(centered, center_input=False)
        z_q, tokens = quantize(z_bounded, self.spec)
        tokens.n_atoms = pc.n_atoms
        tokens.compression = self.config.compression_k
        latent = codes_to_latent(z_bounded if surrogate else z_q, self.spec)
        recon = self.decode_latent(latent, pc.n_atoms)
        groups = groups if groups is not None else ResidueGroups.from_pointcloud(pc)
        terms = total_loss(centered.coords, recon, groups, loss_config)
        return ForwardResult(terms, tokens, recon)


def encode(pc: PointCloud, model: TokenizerModel) -> Tensor:
    return model.encode(pc)


def tokenize(pc: PointCloud, model: TokenizerModel) -> TokenSequence:
    return model.tokenize(pc)


def decode(tokens: TokenSequence, model: TokenizerModel) -> PointCloud:
    return model.decode(tokens)


def forward_loss(pc: PointCloud, model: TokenizerModel, loss_config: LossConfig = LossConfig()) -> ForwardResult:
    return model.forward_loss(pc, loss_config)


def tokenize_many(pcs: List[PointCloud], model: TokenizerModel) -> List[TokenSequence]:
    return [model.tokenize(pc) for pc in pcs]
