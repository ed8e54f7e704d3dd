"""Parallel-ensemble causal direction inference with IGCI base learners."""

from .core import Direction, IgciScore, SamplePairs, igci_deltas, igci_score, normalize_unit_interval, slope_entropy
from .ensemble import (
    EnsembleConfig,
    EnsembleDecision,
    WeightingScheme,
    default_k_schedule,
    prefix_replay,
    run_ensemble,
    subsample,
    vote,
)
from .errors import (
    AllTasksDegenerate,
    ConstantInput,
    DegenerateData,
    FactorizationFailure,
    InvalidSubsampleSize,
    ParseError,
    PeciError,
    Saturated,
    TooFewRows,
)

__version__ = "0.1.0"

__all__ = [
    "Direction", "IgciScore", "SamplePairs", "igci_deltas", "igci_score",
    "normalize_unit_interval", "slope_entropy",
    "EnsembleConfig", "EnsembleDecision", "WeightingScheme", "default_k_schedule",
    "prefix_replay", "run_ensemble", "subsample", "vote",
    "AllTasksDegenerate", "ConstantInput", "DegenerateData", "FactorizationFailure",
    "InvalidSubsampleSize", "ParseError", "PeciError", "Saturated", "TooFewRows",
]
