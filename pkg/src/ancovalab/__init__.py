"""Simulation laboratory for covariate adjustment in randomized experiments.

The package implements both sides of a classical tension: conditional on the
treatment assignment, adjusting for covariates inflates the variance of the
treatment coefficient by exactly the variance inflation factor; averaging
over the assignment, adjustment can only help (asymptotically).  Exact
least-squares machinery, randomization designs, a constant-effect data
generator, and Monte Carlo regime runners turn the relevant identities into
checkable numbers.
"""

from .designs import (
    DesignSpec,
    bernoulli_assignment,
    complete_randomization,
    condition_on_counts,
    draw_assignment,
    enumerate_assignments,
    mahalanobis_balance,
    rerandomize,
)
from .dgp import (
    Dataset,
    DgpSpec,
    assemble,
    center_covariates,
    draw_errors,
    generate,
    regenerate_assignment,
    regenerate_errors,
    unit_variance_covariates,
)
from .errors import (
    AcceptanceExhausted,
    AncovaLabError,
    ConstantTreatment,
    DegenerateAssignment,
    DimensionError,
    DimensionMismatch,
    InsufficientDof,
    InvalidCounts,
    PerfectCollinearity,
    RankDeficient,
    SingularCovariance,
)
from .estimators import (
    Assignment,
    EstimatorResult,
    ancova_estimator,
    diff_in_means,
    finite_pop_covariance,
    lin_estimator,
    unadjusted_estimator,
)
from .montecarlo import (
    DecompositionReport,
    EstimatorSummary,
    ImbalancePick,
    RegimeReport,
    Table1Report,
    VarianceRatioSummary,
    estimated_variance_comparison,
    run_conditional_on_eps,
    run_conditional_on_z,
    run_unconditional,
    select_imbalanced_assignment,
    table1_report,
    total_variance_decomposition,
)
from .ols import (
    DesignMatrix,
    OlsFit,
    estimated_variance_adjusted,
    estimated_variance_unadjusted,
    fwl_residualize,
    least_squares,
    r_squared_z_given_x,
    vif,
)
from .rng import substream

__version__ = "0.1.0"

__all__ = [
    "AcceptanceExhausted",
    "AncovaLabError",
    "Assignment",
    "ConstantTreatment",
    "Dataset",
    "DecompositionReport",
    "DegenerateAssignment",
    "DesignMatrix",
    "DesignSpec",
    "DgpSpec",
    "DimensionError",
    "DimensionMismatch",
    "EstimatorResult",
    "EstimatorSummary",
    "ImbalancePick",
    "InsufficientDof",
    "InvalidCounts",
    "OlsFit",
    "PerfectCollinearity",
    "RankDeficient",
    "RegimeReport",
    "SingularCovariance",
    "Table1Report",
    "VarianceRatioSummary",
    "ancova_estimator",
    "assemble",
    "bernoulli_assignment",
    "center_covariates",
    "complete_randomization",
    "condition_on_counts",
    "diff_in_means",
    "draw_assignment",
    "draw_errors",
    "enumerate_assignments",
    "estimated_variance_adjusted",
    "estimated_variance_comparison",
    "estimated_variance_unadjusted",
    "finite_pop_covariance",
    "fwl_residualize",
    "generate",
    "least_squares",
    "lin_estimator",
    "mahalanobis_balance",
    "r_squared_z_given_x",
    "regenerate_assignment",
    "regenerate_errors",
    "rerandomize",
    "run_conditional_on_eps",
    "run_conditional_on_z",
    "run_unconditional",
    "select_imbalanced_assignment",
    "substream",
    "table1_report",
    "total_variance_decomposition",
    "unadjusted_estimator",
    "unit_variance_covariates",
    "vif",
]
