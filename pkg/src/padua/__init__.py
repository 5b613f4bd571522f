"""Uniform approximation of periodic functions and their derivatives from noisy queries."""

from padua.algorithm import (
    FitResult,
    Oracle,
    PaduaConfig,
    build_design,
    choose_N,
    fit,
    least_squares,
    model_size,
    predict,
)
from padua.baselines import LocalEstimator, LocalFitConfig, lpe_predict, nw_predict
from padua.design import Design, compute_design, epsilon_cover, round_allocation
from padua.errors import (
    CoverTooLarge,
    DegenerateFeatures,
    InsufficientBudget,
    KernelNonnegative,
    OracleError,
    PaduaError,
    ValidationError,
    WavFormatError,
)
from padua.hard_instances import hard_pair, kl_budget, mollifier_eval, packing_family, squeezed
from padua.oracles import (
    GroundTruth,
    extract_periodic_segments,
    noisy_oracle,
    segment_to_function,
    synthetic_function,
    wav_load,
)
from padua.trig import (
    KernelDecomposition,
    KernelTable,
    TrigPoly,
    circular_convolve,
    decompose,
    dirichlet,
    feature_vector,
    l1_norm,
    sample_eta,
    soc,
    trig_eval,
    vallee_poussin,
    wrap,
)

__version__ = "0.1.0"

__all__ = [
    "CoverTooLarge",
    "DegenerateFeatures",
    "Design",
    "FitResult",
    "GroundTruth",
    "InsufficientBudget",
    "KernelDecomposition",
    "KernelNonnegative",
    "KernelTable",
    "LocalEstimator",
    "LocalFitConfig",
    "Oracle",
    "OracleError",
    "PaduaConfig",
    "PaduaError",
    "TrigPoly",
    "ValidationError",
    "WavFormatError",
    "build_design",
    "choose_N",
    "circular_convolve",
    "compute_design",
    "decompose",
    "dirichlet",
    "epsilon_cover",
    "extract_periodic_segments",
    "feature_vector",
    "fit",
    "hard_pair",
    "kl_budget",
    "l1_norm",
    "least_squares",
    "lpe_predict",
    "model_size",
    "mollifier_eval",
    "noisy_oracle",
    "nw_predict",
    "packing_family",
    "predict",
    "round_allocation",
    "sample_eta",
    "segment_to_function",
    "soc",
    "squeezed",
    "synthetic_function",
    "trig_eval",
    "vallee_poussin",
    "wav_load",
    "wrap",
]
