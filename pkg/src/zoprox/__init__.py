"""zoprox: derivative-free composite optimization.

Minimizes ``h(x) = f(x) + r(x)`` where only function values of the smooth
loss ``f`` are available and the regularizer ``r`` has a cheap proximal
mapping. Gradients and diagonal curvature are estimated by central
differences on one shared set of trial points; the main solver preconditions
each proximal step with the estimated diagonal, and a plain zeroth-order
proximal-gradient baseline is included for comparison.
"""

__version__ = "0.1.0"

from .errors import (
    DatasetParseError,
    InexactSolveError,
    InvalidParameterError,
    NumericalError,
    OracleError,
    SubproblemError,
    ZoproxError,
)
from .estimators import (
    DELTA_MIN,
    DerivativeEstimates,
    build_estimates,
    estimate_gradient,
    estimate_hess_diag,
)
from .oracle import EvalCounter, ObjectiveModel, Oracle, SquaredL2, TrialBatch
from .problems import (
    ClassificationInstance,
    LassoInstance,
    SparseDataset,
    gen_lasso,
    lasso_blackbox,
    load_libsvm,
    parse_libsvm,
    seeded_rng,
    sigmoid_objective,
    standard_normal,
)
from .prox import (
    L1,
    AbsoluteValue,
    CustomRegularizer,
    Regularizer,
    SeparablePieces,
    SeparableRegularizer,
    Zero,
    prox_scalar,
    soft_threshold,
)
from .solvers import (
    IterationRecord,
    SolverConfig,
    SolverReport,
    constant_sigma,
    constant_stepsize,
    default_delta,
    default_epsilon,
    heuristic_sigma,
    ipzopm,
    prox_grad_mapping,
    stationarity_norm,
    with_stepsize,
    zopg,
)
from .subproblem import (
    LocalModel,
    SubproblemSolution,
    model_value,
    solve_inexact,
    solve_separable,
)

__all__ = [
    "__version__",
    "ZoproxError",
    "InvalidParameterError",
    "OracleError",
    "NumericalError",
    "SubproblemError",
    "InexactSolveError",
    "DatasetParseError",
    "DELTA_MIN",
    "DerivativeEstimates",
    "build_estimates",
    "estimate_gradient",
    "estimate_hess_diag",
    "EvalCounter",
    "ObjectiveModel",
    "Oracle",
    "SquaredL2",
    "TrialBatch",
    "Regularizer",
    "SeparableRegularizer",
    "SeparablePieces",
    "CustomRegularizer",
    "L1",
    "Zero",
    "AbsoluteValue",
    "prox_scalar",
    "soft_threshold",
    "LocalModel",
    "SubproblemSolution",
    "model_value",
    "solve_inexact",
    "solve_separable",
    "SolverConfig",
    "SolverReport",
    "IterationRecord",
    "ipzopm",
    "zopg",
    "prox_grad_mapping",
    "stationarity_norm",
    "default_delta",
    "default_epsilon",
    "heuristic_sigma",
    "constant_sigma",
    "constant_stepsize",
    "with_stepsize",
    "LassoInstance",
    "gen_lasso",
    "lasso_blackbox",
    "ClassificationInstance",
    "sigmoid_objective",
    "SparseDataset",
    "parse_libsvm",
    "load_libsvm",
    "seeded_rng",
    "standard_normal",
]
