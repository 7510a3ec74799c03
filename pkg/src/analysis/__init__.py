from src.analysis.evaluation import EvalResult, Summary, compare_structures, domain_breakdown, evaluate, summarize
from src.analysis.mixing import DeletionEffect, MixingResult, deletion_effect, fit_depth_trend, mixing_radius
from src.analysis.report import SweepReport, load_report
from src.analysis.studies import (
    ABLATION_LADDER,
    PowerLaw,
    StudyData,
    ablation_harness,
    codebook_scaling_study,
    compression_study,
    fit_power_law,
    run_experiment,
)
from src.analysis.sweeps import binned_means, center_distance_profile, rotation_sweep, tokens_at_angle

__all__ = [
    "EvalResult",
    "Summary",
    "compare_structures",
    "domain_breakdown",
    "evaluate",
    "summarize",
    "DeletionEffect",
    "MixingResult",
    "deletion_effect",
    "fit_depth_trend",
    "mixing_radius",
    "SweepReport",
    "load_report",
    "ABLATION_LADDER",
    "PowerLaw",
    "StudyData",
    "ablation_harness",
    "codebook_scaling_study",
    "compression_study",
    "fit_power_law",
    "run_experiment",
    "binned_means",
    "center_distance_profile",
    "rotation_sweep",
    "tokens_at_angle",
]
