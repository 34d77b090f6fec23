"""Type-II error exponents for distributed hypothesis testing over noisy channels."""

__version__ = "0.1.0"

from .bc import (
    BcDiffAux,
    BcEqualAux,
    BcLabeling,
    BcOptimizeReport,
    BcRegion,
    DIFF_COMPONENT_NAMES,
    EQUAL_COMPONENT_NAMES,
    bc_diff_laws,
    bc_diff_region,
    bc_equal_law,
    bc_equal_region,
    bc_optimize,
    diff_component_problem,
    equal_component_problem,
)
from .dmc import (
    DmcAuxChoice,
    ExponentReport,
    bsc_row_divergence,
    dmc_exponents,
    dmc_no_uep,
    dmc_optimize,
    gtci_optimal,
)
from .gaussian import (
    GaussianSpec,
    gauss_kl,
    mac_gauss_achievable,
    mac_gauss_upper,
    mac_ortho_gauss_optimal,
    p2p_gauss_optimal,
)
from .mac import (
    COMPONENT_NAMES,
    MacAuxChoice,
    MacExponentReport,
    MacSeparateAux,
    component_problem,
    mac_exponents,
    mac_gtci,
    mac_gtci_slack,
    mac_joint_law,
    mac_optimize,
    orthogonal_optimal,
    split_orthogonal,
)
from .search import SearchBudget, SearchTrace, multistart_maximize
from .projection import (
    CouplingProblem,
    EntropyFloor,
    MarginalConstraint,
    SolveReport,
    brute_force,
    solve,
)
from .probability import (
    Alphabet,
    BudgetError,
    Channel,
    HypothesisProblem,
    InfeasibleError,
    InputError,
    JointPmf,
    LOG2E,
    channel_capacity,
    compose,
    condition,
    conditional,
    empirical_type,
    entropy_measures,
    kl_divergence,
    marginalize,
    product,
)

__all__ = [
    "Alphabet",
    "BcDiffAux",
    "BcEqualAux",
    "BcLabeling",
    "BcOptimizeReport",
    "BcRegion",
    "BudgetError",
    "COMPONENT_NAMES",
    "Channel",
    "CouplingProblem",
    "DIFF_COMPONENT_NAMES",
    "DmcAuxChoice",
    "EQUAL_COMPONENT_NAMES",
    "EntropyFloor",
    "ExponentReport",
    "GaussianSpec",
    "HypothesisProblem",
    "InfeasibleError",
    "InputError",
    "JointPmf",
    "LOG2E",
    "MacAuxChoice",
    "MacExponentReport",
    "MacSeparateAux",
    "MarginalConstraint",
    "SearchBudget",
    "SearchTrace",
    "SolveReport",
    "bc_diff_laws",
    "bc_diff_region",
    "bc_equal_law",
    "bc_equal_region",
    "bc_optimize",
    "brute_force",
    "bsc_row_divergence",
    "component_problem",
    "diff_component_problem",
    "dmc_exponents",
    "dmc_no_uep",
    "dmc_optimize",
    "equal_component_problem",
    "gauss_kl",
    "gtci_optimal",
    "mac_exponents",
    "mac_gauss_achievable",
    "mac_gauss_upper",
    "mac_gtci",
    "mac_gtci_slack",
    "mac_joint_law",
    "mac_optimize",
    "mac_ortho_gauss_optimal",
    "multistart_maximize",
    "orthogonal_optimal",
    "p2p_gauss_optimal",
    "solve",
    "split_orthogonal",
    "channel_capacity",
    "compose",
    "condition",
    "conditional",
    "empirical_type",
    "entropy_measures",
    "kl_divergence",
    "marginalize",
    "product",
    "__version__",
]
