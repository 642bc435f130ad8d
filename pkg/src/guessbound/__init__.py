"""Lower bounds on guessing entropy from Shannon entropy, with a side-channel harness.

The package turns a probability list (or just its entropy and smallest
probability) into a family of lower bounds on the expected number of guesses
needed to find the secret, evaluates them stably in the log2 domain for
cryptographic key sizes, and ships a template-attack simulator plus a
verification suite for the extremal claims behind the bound coefficients.
"""

from .bounds import (
    ALL_METHODS,
    BoundResult,
    BoundsError,
    EntropyInput,
    MasseyLikeCoefficients,
    bound_log2,
    evaluate_all,
    massey_bound,
    massey_chain_half_bound,
    massey_chain_sup_bound,
    massey_split_half_bound,
    max_entropy_given_ge,
    optimize_alpha,
    rioul_bound,
    rioul_chain_half_weak_bound,
    rioul_chain_sup_bound,
    rioul_improved_bound,
    rioul_split_sup_bound,
)
from .dist import (
    DistributionError,
    GEBoundCell,
    GECurve,
    GECurveRow,
    NoPositiveMassError,
    ProbDist,
    ProductDistStats,
    SupportOverflowError,
    binary_entropy,
    combine_materialize,
    combine_stats,
    guessing_entropy_exact,
    load_prob_csv,
    make_dist,
    shannon_entropy,
)
from .oracle import (
    chain_bound_at_depth,
    f_gap,
    falsify_coefficients,
    finite_diff_check,
    log_mu_grid,
    random_dist,
    refine_sequence,
    split_once,
)
from .sca import (
    AES_SBOX,
    LeakageParams,
    TemplateSet,
    TraceSet,
    attack_posteriors,
    build_templates,
    run_ge_experiment,
    simulate_traces,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_METHODS",
    "AES_SBOX",
    "BoundResult",
    "BoundsError",
    "DistributionError",
    "EntropyInput",
    "GEBoundCell",
    "GECurve",
    "GECurveRow",
    "LeakageParams",
    "MasseyLikeCoefficients",
    "NoPositiveMassError",
    "ProbDist",
    "ProductDistStats",
    "SupportOverflowError",
    "TemplateSet",
    "TraceSet",
    "attack_posteriors",
    "binary_entropy",
    "bound_log2",
    "build_templates",
    "chain_bound_at_depth",
    "combine_materialize",
    "combine_stats",
    "evaluate_all",
    "f_gap",
    "falsify_coefficients",
    "finite_diff_check",
    "guessing_entropy_exact",
    "load_prob_csv",
    "log_mu_grid",
    "make_dist",
    "massey_bound",
    "massey_chain_half_bound",
    "massey_chain_sup_bound",
    "massey_split_half_bound",
    "max_entropy_given_ge",
    "optimize_alpha",
    "random_dist",
    "refine_sequence",
    "rioul_bound",
    "rioul_chain_half_weak_bound",
    "rioul_chain_sup_bound",
    "rioul_improved_bound",
    "rioul_split_sup_bound",
    "run_ge_experiment",
    "shannon_entropy",
    "simulate_traces",
    "split_once",
    "__version__",
]
