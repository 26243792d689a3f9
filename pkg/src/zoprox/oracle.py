"""Black-box wrapper: evaluation counting and symmetric trial-point batches.

The solvers only ever touch the smooth loss through this module. One outer
iteration consumes a :class:`TrialBatch`, i.e. the loss values at the center
point and at the ``2n`` symmetric perturbations ``x +- delta * e_i``.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

import numpy as np

from .errors import InvalidParameterError, OracleError
from .prox import Regularizer


class SmoothTerm(Protocol):
    """Analytic smooth addition to the black box, with exact derivatives."""

    def value(self, x: np.ndarray) -> float: ...

    def grad(self, x: np.ndarray) -> np.ndarray: ...

    def hess_diag(self, x: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class SquaredL2:
    """``weight * ||x||^2`` with gradient ``2*weight*x`` and constant diagonal."""

    weight: float

    def value(self, x: np.ndarray) -> float:
        return self.weight * float(x @ x)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * self.weight * x

    def hess_diag(self, x: np.ndarray) -> np.ndarray:
        return np.full(x.shape[0], 2.0 * self.weight)


@dataclass
class ObjectiveModel:
    """Composite problem data.

    ``blackbox`` is the only access to the smooth loss: a pure function from a
    point in R^n to a float. Purity (identical inputs give bit-identical
    outputs) is a contract, not enforced; pass ``check_purity=True`` to
    :class:`Oracle` to spot-check it.

    ``blackbox_batch`` and ``axis_batch`` are optional fast paths that must
    compute the same quantities as ``blackbox``:

    * ``blackbox_batch(points)`` maps a ``(k, n)`` array of rows to ``k`` values;
    * ``axis_batch(x, delta)`` returns ``(values_plus, values_minus, value_center)``
      for the symmetric coordinate perturbations around ``x``.

    Either path is charged the same number of evaluations as point-by-point
    calls, so solver accounting does not depend on which path runs.
    """

    dimension: int
    blackbox: Callable[[np.ndarray], float]
    regularizer: Regularizer
    known_smooth: Optional[SmoothTerm] = None
    blackbox_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None
    axis_batch: Optional[Callable[[np.ndarray, float], tuple]] = None
    concurrency_safe: bool = False

    def __post_init__(self):
        if int(self.dimension) < 1:
            raise InvalidParameterError("dimension must be at least 1")
        self.dimension = int(self.dimension)


@dataclass
class EvalCounter:
    """Monotone counter of black-box calls; safe under concurrent increments."""

    total_blackbox_evals: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def add(self, k: int) -> None:
        with self._lock:
            self.total_blackbox_evals += k


@dataclass
class TrialBatch:
    """Loss values at ``x`` and at ``x +- delta * e_i`` for every axis ``i``."""

    center: np.ndarray
    delta: float
    values_plus: np.ndarray
    values_minus: np.ndarray
    value_center: float


class Oracle:
    """Counts every black-box call made on behalf of one model.

    ``workers > 1`` evaluates the batch points concurrently when the model is
    declared ``concurrency_safe``; results are written into the output arrays
    by index, so a concurrent batch is bit-identical to a serial one.

    ``check_purity=True`` re-evaluates one randomly chosen trial point per
    batch and raises :class:`OracleError` unless the value matches exactly.
    The re-evaluation is a real call and is counted.
    """

    def __init__(
        self,
        model: ObjectiveModel,
        workers: int = 1,
        check_purity: bool = False,
        purity_seed: int = 0,
    ):
        if workers < 1:
            raise InvalidParameterError("workers must be at least 1")
        self.model = model
        self.workers = int(workers)
        self.counter = EvalCounter()
        self._purity_rng = (
            np.random.Generator(np.random.PCG64(purity_seed)) if check_purity else None
        )

    @property
    def evals(self) -> int:
        return self.counter.total_blackbox_evals

    def _check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.model.dimension:
            raise InvalidParameterError(
                f"point must be a vector of length {self.model.dimension}, got shape {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise InvalidParameterError("point has non-finite coordinates")
        return x

    def _raw_call(self, x: np.ndarray) -> float:
        self.counter.add(1)
        value = float(self.model.blackbox(x))
        if not np.isfinite(value):
            raise OracleError(f"black box returned non-finite value {value}", point=x.copy())
        return value

    def blackbox_value(self, x) -> float:
        """One counted black-box call with input/output validation."""
        return self._raw_call(self._check_point(x))

    def evaluate(self, x) -> float:
        """Smooth part f(x): the black box plus any analytic smooth term."""
        x = self._check_point(x)
        value = self._raw_call(x)
        if self.model.known_smooth is not None:
            value += float(self.model.known_smooth.value(x))
        return value

    def sample_batch(self, x, delta: float) -> TrialBatch:
        """Evaluate the center and all 2n symmetric axis perturbations.

        Costs exactly ``2n + 1`` black-box evaluations. Only the black-box
        part is sampled; an analytic smooth term is handled exactly by the
        caller and never enters the batch.
        """
        x = self._check_point(x)
        delta = float(delta)
        if not np.isfinite(delta) or delta <= 0.0:
            raise InvalidParameterError(f"finite-difference radius must be positive, got {delta}")

        n = self.model.dimension
        if self.model.axis_batch is not None:
            vp, vm, vc = self.model.axis_batch(x, delta)
            self.counter.add(2 * n + 1)
            values_plus = np.asarray(vp, dtype=float).copy()
            values_minus = np.asarray(vm, dtype=float).copy()
            value_center = float(vc)
        elif self.model.blackbox_batch is not None:
            points = np.tile(x, (2 * n + 1, 1))
            idx = np.arange(n)
            points[1 + idx, idx] += delta
            points[1 + n + idx, idx] -= delta
            values = np.asarray(self.model.blackbox_batch(points), dtype=float)
            self.counter.add(2 * n + 1)
            if values.shape != (2 * n + 1,):
                raise OracleError(
                    f"batch evaluator returned shape {values.shape}, expected ({2 * n + 1},)"
                )
            value_center = float(values[0])
            values_plus = values[1 : n + 1].copy()
            values_minus = values[n + 1 :].copy()
        else:
            values_plus = np.empty(n)
            values_minus = np.empty(n)
            if self.workers > 1 and self.model.concurrency_safe:
                value_center, values_plus, values_minus = self._threaded_batch(x, delta)
            else:
                value_center = self._raw_call(x)
                for i in range(n):
                    p = x.copy()
                    p[i] += delta
                    values_plus[i] = self._raw_call(p)
                    p = x.copy()
                    p[i] -= delta
                    values_minus[i] = self._raw_call(p)

        bad = ~np.isfinite(values_plus)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            p = x.copy()
            p[i] += delta
            raise OracleError("black box returned non-finite value in batch", point=p)
        bad = ~np.isfinite(values_minus)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            p = x.copy()
            p[i] -= delta
            raise OracleError("black box returned non-finite value in batch", point=p)
        if not np.isfinite(value_center):
            raise OracleError("black box returned non-finite value at center", point=x.copy())

        batch = TrialBatch(
            center=x.copy(),
            delta=delta,
            values_plus=values_plus,
            values_minus=values_minus,
            value_center=float(value_center),
        )
        if self._purity_rng is not None:
            self._spot_check(batch)
        return batch

    def _threaded_batch(self, x: np.ndarray, delta: float):
        n = self.model.dimension
        points = [x.copy()]
        for i in range(n):
            p = x.copy()
            p[i] += delta
            points.append(p)
        for i in range(n):
            p = x.copy()
            p[i] -= delta
            points.append(p)
        values = np.empty(2 * n + 1)

        def work(j: int) -> None:
            values[j] = self._raw_call(points[j])

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            list(pool.map(work, range(2 * n + 1)))
        return float(values[0]), values[1 : n + 1].copy(), values[n + 1 :].copy()

    def _spot_check(self, batch: TrialBatch) -> None:
        n = self.model.dimension
        j = int(self._purity_rng.integers(0, 2 * n + 1))
        p = batch.center.copy()
        if j == 0:
            expected = batch.value_center
        elif j <= n:
            p[j - 1] += batch.delta
            expected = float(batch.values_plus[j - 1])
        else:
            p[j - n - 1] -= batch.delta
            expected = float(batch.values_minus[j - n - 1])
        again = self._raw_call(p)
        if again != expected:
            raise OracleError(
                f"purity violation: repeated evaluation gave {again!r}, first gave {expected!r}",
                point=p,
            )
