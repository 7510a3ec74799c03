from src.quantizer.fsq import (
    FsqSpec,
    TokenSequence,
    bound,
    code_to_id,
    codebook_usage,
    codes_to_ids,
    codes_to_latent,
    id_to_code,
    ids_to_codes,
    quantize,
    tokens_to_latent,
)
from src.quantizer.token_io import read_tokens, write_tokens

__all__ = [
    "FsqSpec",
    "TokenSequence",
    "bound",
    "code_to_id",
    "codebook_usage",
    "codes_to_ids",
    "codes_to_latent",
    "id_to_code",
    "ids_to_codes",
    "quantize",
    "tokens_to_latent",
    "read_tokens",
    "write_tokens",
]
