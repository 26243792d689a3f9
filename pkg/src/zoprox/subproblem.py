"""The diagonal quadratic local model and its exact or inexact minimization.

Around a center ``x`` the solvers build

    l(y) = f(x) + <g, y - x> + 1/2 sum_i tau_i (y_i - x_i)^2 + r(y),

where ``g`` is the gradient estimate and ``tau_i`` the shifted curvature
estimate. With all ``tau_i > 0`` the model is strongly convex; for separable
regularizers its minimizer is a single coordinate-wise prox step, otherwise a
proximal-gradient inner loop drives a certified optimality gap below a target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InexactSolveError, InvalidParameterError, SubproblemError
from .prox import Regularizer


@dataclass
class LocalModel:
    """One iteration's model data.

    ``precond_diag`` holds ``tau_i = hess_diag_i + sigma`` (already shifted);
    ``f_center`` is the smooth value at the center, so that
    ``model_value(model, center) == f_center + r(center)``.
    """

    center: np.ndarray
    grad: np.ndarray
    precond_diag: np.ndarray
    sigma: float
    f_center: float
    regularizer: Regularizer


@dataclass(frozen=True)
class SubproblemSolution:
    """Candidate minimizer with a certified upper bound on its model gap.

    ``gap_bound`` is 0 exactly for the closed-form path; the inexact path
    reports a strong-convexity bound on ``l(point) - inf l``.
    """

    point: np.ndarray
    gap_bound: float
    inner_iters: int


def model_value(model: LocalModel, y) -> float:
    """Evaluate the local model at ``y``."""
    y = np.asarray(y, dtype=float)
    d = y - model.center
    quad = 0.5 * float(model.precond_diag @ (d * d))
    return model.f_center + float(model.grad @ d) + quad + model.regularizer.value(y)


def _curvature(model: LocalModel) -> np.ndarray:
    tau = np.asarray(model.precond_diag, dtype=float)
    if not np.all(np.isfinite(tau)) or np.any(tau <= 0.0):
        raise SubproblemError("model curvature entries must all be positive and finite")
    return tau


def solve_separable(model: LocalModel) -> SubproblemSolution:
    """Exact minimizer for separable regularizers: one prox step per coordinate.

    Coordinate ``i`` solves ``min_t r_i(t) + tau_i/2 (t - (x_i - g_i/tau_i))^2``,
    i.e. a scalar prox with parameter ``1/tau_i``.
    """
    reg = model.regularizer
    if not reg.separable:
        raise SubproblemError("closed-form path requires a separable regularizer")
    tau = _curvature(model)
    targets = model.center - model.grad / tau
    point = reg.prox_each(targets, 1.0 / tau)
    return SubproblemSolution(point=point, gap_bound=0.0, inner_iters=0)


def solve_inexact(model: LocalModel, epsilon: float, max_inner: int = 10_000) -> SubproblemSolution:
    """Proximal-gradient inner loop with a certified optimality gap.

    Runs fixed-stepsize proximal gradient (stepsize ``1/max(tau)``) from the
    model center. After each step the vector

        xi = (T - M I)(y_next - y),   T = diag(tau), M = max(tau)

    is an exact subgradient of the model at ``y_next``, so strong convexity
    with modulus ``m = min(tau)`` certifies ``l(y_next) - inf l <= ||xi||^2 / (2m)``.
    Since the inner iterates never increase the model, the smallest bound seen
    so far remains valid for every later iterate.

    Raises :class:`InexactSolveError` carrying the best iterate when the
    budget runs out before the bound reaches ``epsilon``.
    """
    epsilon = float(epsilon)
    if not np.isfinite(epsilon) or epsilon <= 0.0:
        raise InvalidParameterError(f"target gap must be positive, got {epsilon}")
    if max_inner < 1:
        raise InvalidParameterError("max_inner must be at least 1")

    tau = _curvature(model)
    m = float(tau.min())
    big = float(tau.max())
    reg = model.regularizer
    x = model.center
    g = model.grad

    y = x.copy()
    best_bound = np.inf
    for j in range(1, max_inner + 1):
        grad_q = g + tau * (y - x)
        y_next = reg.prox(y - grad_q / big, 1.0 / big)
        xi = (tau - big) * (y_next - y)
        bound = float(xi @ xi) / (2.0 * m)
        best_bound = min(best_bound, bound)
        y = y_next
        if best_bound <= epsilon:
            return SubproblemSolution(point=y, gap_bound=best_bound, inner_iters=j)

    best = SubproblemSolution(point=y, gap_bound=best_bound, inner_iters=max_inner)
    raise InexactSolveError(
        f"gap bound {best_bound:.3e} above target {epsilon:.3e} after {max_inner} inner steps",
        best=best,
    )
