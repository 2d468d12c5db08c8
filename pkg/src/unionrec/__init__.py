"""Subspace recovery from noisy linear samples of a union of subspaces.

The package bundles the two recovery algorithms (exhaustive maximum
likelihood and Block-OMP), the analytic error-probability bounds and
sample-complexity calculators that govern them, and a reproducible Monte
Carlo harness that validates bound against empirical error.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundConfig,
    BoundValue,
    ComplexityReport,
    block_bound_random,
    block_complexity,
    chernoff_grouped_bound,
    general_complexity,
    grouped_bound,
    pairwise_error_bound,
    rip_block_sample_count,
    rip_sample_count,
    standard_bound_random,
    union_avg_bound,
    wainwright_bound,
    wainwright_complexity,
)
from .decode import DecodeResult, bomp, decision_statistic, evaluate_trial, ml_decode
from .estimators import BlockOMP, MLSubspaceDecoder
from .exceptions import (
    ConfigError,
    DimensionMismatchError,
    DomainError,
    NoCandidateError,
    RankDeficientError,
    SizeError,
    UnionRecError,
)
from .model import (
    BlockModel,
    BlockSignal,
    GeneralUnion,
    NoiseSpec,
    SamplingOperator,
    alpha_min_sq,
    alpha_profile,
    bsnr_min,
    build_block_basis,
    count_t_of_l,
    csnr_min,
    enumerate_supports,
    generate_block_signal,
    lambda_j_given_i,
    observe,
    overlap_l,
    sample_gaussian_operator,
)
from .montecarlo import (
    ExperimentConfig,
    PointRecord,
    SweepResult,
    pairwise_instance,
    pairwise_validation,
    run_point,
    run_sweep,
    wilson_interval,
)
from .specfun import (
    bessel_k,
    chi2_diff_pdf,
    chi2_diff_tail_bound,
    gaussian_q,
    ln_gamma,
    psi_term,
)
