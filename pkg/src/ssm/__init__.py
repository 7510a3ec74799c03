from src.ssm.block import SsmConfig, SsmParams, bidirectional_block, mamba_block
from src.ssm.scan import (
    PARALLEL,
    SEQUENTIAL,
    ScanInputs,
    causal_convolve,
    lti_kernel,
    run_scan,
    scan_parallel,
    scan_sequential,
    selective_scan,
)

__all__ = [
    "SsmConfig",
    "SsmParams",
    "bidirectional_block",
    "mamba_block",
    "PARALLEL",
    "SEQUENTIAL",
    "ScanInputs",
    "causal_convolve",
    "lti_kernel",
    "run_scan",
    "scan_parallel",
    "scan_sequential",
    "selective_scan",
]
