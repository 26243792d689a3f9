"""Outer loops: the preconditioned zeroth-order proximal method and a
plain zeroth-order proximal-gradient baseline, plus the prox-gradient
stationarity measure used to monitor both.

Each outer iteration samples one trial batch (``2n + 1`` evaluations), reads
the objective value at the center from that batch, checks the termination
rule, and then either steps or stops. The trace therefore ends with one
diagnostic row for the final iterate, so a run that took ``K`` steps records
``K + 1`` rows.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import (
    InexactSolveError,
    InvalidParameterError,
    NumericalError,
    OracleError,
    SubproblemError,
)
from .estimators import DELTA_MIN, DEFAULT_CURVATURE_CAP, build_estimates, estimate_gradient
from .oracle import ObjectiveModel, Oracle
from .prox import Regularizer
from .subproblem import LocalModel, solve_inexact, solve_separable

DeltaSchedule = Callable[[int], float]
EpsilonSchedule = Callable[[int], float]
SigmaSchedule = Callable[[int, np.ndarray, Optional[np.ndarray]], float]
StepSchedule = Callable[[int], float]


def default_delta(k: int) -> float:
    """Finite-difference radius ``1 / sqrt(k + 1)``."""
    return 1.0 / math.sqrt(k + 1)


def default_epsilon(k: int) -> float:
    """Summable inner-solve tolerance ``1 / (k + 1)^2``."""
    return 1.0 / (k + 1) ** 2


def heuristic_sigma(
    scale: float = 5000.0, initial: float = 1.0, floor: float = 1e-8
) -> SigmaSchedule:
    """Shift proportional to the previous step length, ``scale * ||x_k - x_{k-1}||``.

    The first iteration has no previous step, so it uses ``initial``; a floor
    keeps the shifted curvature positive when an iterate repeats exactly.
    """

    def schedule(k: int, x: np.ndarray, x_prev: Optional[np.ndarray]) -> float:
        if x_prev is None:
            return initial
        return max(scale * float(np.linalg.norm(x - x_prev)), floor)

    return schedule


def constant_sigma(value: float) -> SigmaSchedule:
    """Fixed shift, e.g. ``2 * (L_f + L_H)`` when those bounds are known."""

    def schedule(k: int, x: np.ndarray, x_prev: Optional[np.ndarray]) -> float:
        return value

    return schedule


def constant_stepsize(value: float) -> StepSchedule:
    def schedule(k: int) -> float:
        return value

    return schedule


@dataclass
class SolverConfig:
    """Schedules, termination rule and caps shared by both solvers.

    ``gamma`` fixes the stationarity-reporting parameter; ``None`` picks an
    admissible value automatically each iteration (``1 / (sigma_k + max|H_k|)``
    for the preconditioned method, the current stepsize for the baseline).
    """

    delta_schedule: DeltaSchedule = default_delta
    sigma_schedule: SigmaSchedule = field(default_factory=heuristic_sigma)
    epsilon_schedule: EpsilonSchedule = default_epsilon
    gamma: Optional[float] = None
    zopg_stepsize: StepSchedule = constant_stepsize(0.01)
    termination_tol: float = 1e-3
    max_iter: int = 1000
    seed: int = 0
    curvature_cap: float = DEFAULT_CURVATURE_CAP
    max_inner: int = 10_000

    def __post_init__(self):
        if self.max_iter < 1:
            raise InvalidParameterError("max_iter must be at least 1")
        if self.termination_tol < 0:
            raise InvalidParameterError("termination_tol must be nonnegative")
        if self.gamma is not None and not self.gamma > 0:
            raise InvalidParameterError("gamma must be positive")
        if not self.curvature_cap > 0:
            raise InvalidParameterError("curvature_cap must be positive")
        if self.max_inner < 1:
            raise InvalidParameterError("max_inner must be at least 1")


@dataclass(frozen=True)
class IterationRecord:
    """One row of the per-iteration trace."""

    k: int
    h: float
    evals: int
    delta: float
    sigma: float
    epsilon: float
    inner_iters: int
    gap_bound: float
    stationarity: float
    step_norm: float
    wall_time: float


@dataclass
class SolverReport:
    """Final state plus the full per-iteration trace of one run.

    ``x`` and ``h`` always describe the same point: the newest iterate whose
    objective value was actually evaluated (the last trace row's center).
    """

    solver: str
    x: Optional[np.ndarray]
    h: float
    records: list[IterationRecord]
    reason: str  # "tolerance" | "max_iter" | "error"
    total_evals: int
    error: Optional[str] = None
    flagged_iterations: list[int] = field(default_factory=list)
    curvature_clamp_events: list[tuple[int, int]] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        """Number of steps actually applied (the trace has one extra final row)."""
        if self.reason == "error":
            return len(self.records)
        return max(len(self.records) - 1, 0)


def prox_grad_mapping(reg: Regularizer, x, gamma: float, grad) -> np.ndarray:
    """``(x - prox(x - gamma * grad, gamma)) / gamma``; its norm measures
    how far ``x`` is from stationarity under the gradient surrogate ``grad``."""
    gamma = float(gamma)
    if not np.isfinite(gamma) or gamma <= 0.0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    x = np.asarray(x, dtype=float)
    grad = np.asarray(grad, dtype=float)
    return (x - reg.prox(x - gamma * grad, gamma)) / gamma


def stationarity_norm(reg: Regularizer, x, gamma: float, grad) -> float:
    return float(np.linalg.norm(prox_grad_mapping(reg, x, gamma, grad)))


def _check_start(model: ObjectiveModel, x0) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float).copy()
    if x0.shape != (model.dimension,):
        raise InvalidParameterError(
            f"x0 must have shape ({model.dimension},), got {x0.shape}"
        )
    if not np.all(np.isfinite(x0)):
        raise InvalidParameterError("x0 has non-finite coordinates")
    r0 = model.regularizer.value(x0)
    if not np.isfinite(r0):
        raise InvalidParameterError("x0 lies outside the regularizer's domain")
    return x0


def _positive(value: float, what: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise InvalidParameterError(f"{what} must be positive, got {value}")
    return value


def ipzopm(model: ObjectiveModel, config: SolverConfig, x0) -> SolverReport:
    """Preconditioned zeroth-order proximal method.

    Per iteration: sample the trial batch at ``x_k`` with radius ``delta_k``,
    form the gradient and curvature estimates, shift the curvature by
    ``sigma_k``, and minimize the resulting diagonal model (closed form for
    separable regularizers, certified inexact solve otherwise). Stops when
    ``|h(x_k) - h(x_{k-1})| < termination_tol`` or after ``max_iter`` steps.

    Oracle and numerical failures never propagate; the report carries the
    partial trace with reason ``"error"``. An inner solve that misses its
    gap target is accepted at its best iterate and the iteration is flagged.
    """
    x = _check_start(model, x0)
    oracle = Oracle(model)
    reg = model.regularizer
    known = model.known_smooth

    records: list[IterationRecord] = []
    flagged: list[int] = []
    clamp_events: list[tuple[int, int]] = []
    x_prev: Optional[np.ndarray] = None
    h_prev: Optional[float] = None
    reason = "max_iter"
    error_msg: Optional[str] = None
    # last iterate whose objective value is known, i.e. the newest trace row
    last_center: Optional[np.ndarray] = None
    final_h = math.nan

    for k in range(config.max_iter + 1):
        tic = time.perf_counter()
        try:
            delta = max(_positive(config.delta_schedule(k), "delta_k"), DELTA_MIN)
            eps_k = _positive(config.epsilon_schedule(k), "epsilon_k")
            sigma = _positive(config.sigma_schedule(k, x, x_prev), "sigma_k")

            batch = oracle.sample_batch(x, delta)
            f_x = batch.value_center
            if known is not None:
                f_x += float(known.value(x))
            h_k = f_x + reg.value(x)

            est = build_estimates(batch, cap=config.curvature_cap)
            grad = est.grad if known is None else est.grad + known.grad(x)
            diag = est.hess_diag if known is None else est.hess_diag + known.hess_diag(x)
            if est.clamped:
                clamp_events.append((k, est.clamped))

            gamma = config.gamma
            if gamma is None:
                gamma = 1.0 / (sigma + float(np.max(np.abs(diag))) + 1e-12)
            stat = stationarity_norm(reg, x, gamma, grad)

            stop = h_prev is not None and abs(h_k - h_prev) < config.termination_tol
            if stop or k == config.max_iter:
                records.append(
                    IterationRecord(
                        k, h_k, oracle.evals, delta, sigma, eps_k,
                        0, 0.0, stat, 0.0, time.perf_counter() - tic,
                    )
                )
                reason = "tolerance" if stop else "max_iter"
                last_center, final_h = x, h_k
                break

            local = LocalModel(
                center=x,
                grad=grad,
                precond_diag=diag + sigma,
                sigma=sigma,
                f_center=f_x,
                regularizer=reg,
            )
            if reg.separable:
                sol = solve_separable(local)
            else:
                try:
                    sol = solve_inexact(local, eps_k, config.max_inner)
                except InexactSolveError as exc:
                    sol = exc.best
                    flagged.append(k)
            x_next = sol.point

            records.append(
                IterationRecord(
                    k, h_k, oracle.evals, delta, sigma, eps_k,
                    sol.inner_iters, sol.gap_bound, stat,
                    float(np.linalg.norm(x_next - x)), time.perf_counter() - tic,
                )
            )
            last_center, final_h = x, h_k
            x_prev, x, h_prev = x, x_next, h_k
        except (OracleError, NumericalError, SubproblemError, InvalidParameterError) as exc:
            reason = "error"
            error_msg = str(exc)
            break

    return SolverReport(
        solver="ipzopm",
        x=last_center,
        h=final_h,
        records=records,
        reason=reason,
        total_evals=oracle.evals,
        error=error_msg,
        flagged_iterations=flagged,
        curvature_clamp_events=clamp_events,
    )


def zopg(model: ObjectiveModel, config: SolverConfig, x0) -> SolverReport:
    """Zeroth-order proximal-gradient baseline.

    Steps ``x_{k+1} = prox(x_k - eta_k * g_k, eta_k)`` using the same
    central-difference gradient estimate. The gradient needs only the ``2n``
    axis values; the center value from the same batch supplies ``h(x_k)``
    for the termination rule, so each iteration also costs ``2n + 1`` calls.
    Curvature-related trace columns are not meaningful here and are NaN.
    """
    x = _check_start(model, x0)
    oracle = Oracle(model)
    reg = model.regularizer
    known = model.known_smooth

    records: list[IterationRecord] = []
    h_prev: Optional[float] = None
    reason = "max_iter"
    error_msg: Optional[str] = None
    last_center: Optional[np.ndarray] = None
    final_h = math.nan

    for k in range(config.max_iter + 1):
        tic = time.perf_counter()
        try:
            delta = max(_positive(config.delta_schedule(k), "delta_k"), DELTA_MIN)
            eta = _positive(config.zopg_stepsize(k), "eta_k")

            batch = oracle.sample_batch(x, delta)
            f_x = batch.value_center
            if known is not None:
                f_x += float(known.value(x))
            h_k = f_x + reg.value(x)

            grad = estimate_gradient(batch)
            if known is not None:
                grad = grad + known.grad(x)

            gamma = eta if config.gamma is None else config.gamma
            stat = stationarity_norm(reg, x, gamma, grad)

            stop = h_prev is not None and abs(h_k - h_prev) < config.termination_tol
            if stop or k == config.max_iter:
                records.append(
                    IterationRecord(
                        k, h_k, oracle.evals, delta, math.nan, math.nan,
                        0, math.nan, stat, 0.0, time.perf_counter() - tic,
                    )
                )
                reason = "tolerance" if stop else "max_iter"
                last_center, final_h = x, h_k
                break

            x_next = reg.prox(x - eta * grad, eta)
            records.append(
                IterationRecord(
                    k, h_k, oracle.evals, delta, math.nan, math.nan,
                    0, math.nan, stat,
                    float(np.linalg.norm(x_next - x)), time.perf_counter() - tic,
                )
            )
            last_center, final_h = x, h_k
            x, h_prev = x_next, h_k
        except (OracleError, NumericalError, SubproblemError, InvalidParameterError) as exc:
            reason = "error"
            error_msg = str(exc)
            break

    return SolverReport(
        solver="zopg",
        x=last_center,
        h=final_h,
        records=records,
        reason=reason,
        total_evals=oracle.evals,
        error=error_msg,
    )


def with_stepsize(config: SolverConfig, eta: float) -> SolverConfig:
    """Copy of ``config`` with a constant baseline stepsize."""
    return replace(config, zopg_stepsize=constant_stepsize(_positive(eta, "eta")))
