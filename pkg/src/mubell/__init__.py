"""Bell-violation probabilities for randomly rotated MUB measurements."""

from .correlations import (
    Correlation,
    PairIndex,
    all_pair_indices,
    check_no_signaling,
    compute_correlation,
    extract_two_setting,
    mix,
    white_noise,
)
from .estimator import (
    EstimateSummary,
    TrialConfig,
    TrialRecord,
    clopper_pearson,
    estimate,
    grid_scan,
    histogram,
    run_trial,
)
from .inequalities import (
    BellInequality,
    InequalityFamily,
    cglmp,
    chsh,
    evaluate,
    lift_outcomes,
    max_over_family,
    relabelings,
)
from .mubs import Basis, MubSet, rotate_mubs, standard_mubs, weyl_operators
from .polytope import (
    DeterministicStrategy,
    VisibilityResult,
    enumerate_vertices,
    membership,
    min_visibility_over_pairs,
    visibility,
    visibility_cg,
    visibility_wrt_inequality,
)
from .quantum import (
    SchmidtState,
    TrialSeed,
    born_probability,
    max_entangled_state,
    partial_qutrit_state,
    sample_haar_unitary,
)

__all__ = [
    "Basis",
    "BellInequality",
    "Correlation",
    "DeterministicStrategy",
    "EstimateSummary",
    "InequalityFamily",
    "MubSet",
    "PairIndex",
    "SchmidtState",
    "TrialConfig",
    "TrialRecord",
    "TrialSeed",
    "VisibilityResult",
    "all_pair_indices",
    "born_probability",
    "cglmp",
    "check_no_signaling",
    "chsh",
    "clopper_pearson",
    "compute_correlation",
    "enumerate_vertices",
    "estimate",
    "evaluate",
    "extract_two_setting",
    "grid_scan",
    "histogram",
    "lift_outcomes",
    "max_entangled_state",
    "max_over_family",
    "membership",
    "min_visibility_over_pairs",
    "mix",
    "partial_qutrit_state",
    "relabelings",
    "rotate_mubs",
    "run_trial",
    "sample_haar_unitary",
    "standard_mubs",
    "visibility",
    "visibility_cg",
    "visibility_wrt_inequality",
    "weyl_operators",
    "white_noise",
]

__version__ = "0.1.0"
