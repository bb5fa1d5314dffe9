"""Adaptive column subset selection.

A library and experiment CLI for selecting representative column subsets
of dense matrices: norm, leverage-score, deterministic dual-set, and
near-optimal two-stage samplers, plus round-based adaptive drivers that
boost any of them, with brute-force oracles and a reproducible
experiment harness.
"""

from .adaptive import (
    AdaptiveConfig,
    BoostConfig,
    ResidualMode,
    RoundTrace,
    adaptive_select,
    boost_best_of,
    continued_select,
    dv06_adaptive_select,
    theorem1_bound,
)
from .data_io import (
    Exponential,
    ExplicitSpectrum,
    PowerLaw,
    SyntheticSpec,
    fill_missing_ternary,
    generate_synthetic,
    load_csv,
    load_matrix,
    save_csv,
    save_matrix,
)
from .experiment import (
    Algorithm,
    ExperimentConfig,
    RunReport,
    parse_algorithm,
    run_experiment,
    write_report,
)
from .linalg import (
    ColumnSet,
    SvdFactors,
    best_rank_k,
    frobenius_tail,
    pseudoinverse,
    rank_k_column_projection,
    relative_error_ratio,
    svd,
)
from .oracle import SubsetSearchResult, exhaustive_best_subset, lemma1_check
from .rng import RngStream
from .samplers import (
    DualSetState,
    SamplerKind,
    SamplerSpec,
    additive_error_sample,
    dual_set_select,
    dual_set_sparsify,
    leverage_score_sample,
    near_optimal_select,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveConfig",
    "Algorithm",
    "BoostConfig",
    "ColumnSet",
    "DualSetState",
    "Exponential",
    "ExperimentConfig",
    "ExplicitSpectrum",
    "PowerLaw",
    "ResidualMode",
    "RngStream",
    "RoundTrace",
    "RunReport",
    "SamplerKind",
    "SamplerSpec",
    "SubsetSearchResult",
    "SvdFactors",
    "SyntheticSpec",
    "adaptive_select",
    "additive_error_sample",
    "best_rank_k",
    "boost_best_of",
    "continued_select",
    "dual_set_select",
    "dual_set_sparsify",
    "dv06_adaptive_select",
    "exhaustive_best_subset",
    "fill_missing_ternary",
    "frobenius_tail",
    "generate_synthetic",
    "lemma1_check",
    "leverage_score_sample",
    "load_csv",
    "load_matrix",
    "near_optimal_select",
    "parse_algorithm",
    "pseudoinverse",
    "rank_k_column_projection",
    "relative_error_ratio",
    "run_experiment",
    "save_csv",
    "save_matrix",
    "svd",
    "theorem1_bound",
    "write_report",
]
