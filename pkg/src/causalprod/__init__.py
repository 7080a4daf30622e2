"""Hadamard, Jury and causal matrix products with numerical checks of their
determinant inequalities."""

from .bounds import (
    BoundReport,
    ChainReport,
    EllLDiagnostics,
    MinorGateError,
    NotApplicableError,
    causal_bound,
    causal_dichotomy_bound,
    ell_L_diagnostics,
    hadamard_det_bound,
    jury_main_bound,
    jury_product_bound,
    jury_special_bound,
    minor_ratio_bound,
    oppenheim_chain,
    tilde,
)
from .harness import TrialConfig, TrialRecord, run_trials, summarize
from .linalg import (
    HermitianPsd,
    NotHermitianError,
    NotPSDError,
    certify_psd,
    cholesky,
    det,
    det_bruteforce,
    gram_vectors,
    leading_minors,
    random_psd,
)
from .products import (
    CausalSpec,
    builtin_spec,
    causal,
    causal_gram_oracle,
    convolve,
    hadamard,
    jury,
    jury_congruence,
    random_spec,
    toeplitz_lower,
    validate_spec,
)
from .search import SearchProblem, SearchResult, diagonal_gap, minimize_gap

__version__ = "0.1.0"
